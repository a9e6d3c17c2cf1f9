#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>

namespace tcbforge {

// Large enough that exhaustion only happens on purpose, small enough that a
// runaway loop still terminates.
inline constexpr std::uint64_t kDefaultFuel = 1'000'000'000'000ULL;

struct Fuel {
  std::uint64_t remaining = kDefaultFuel;

  // Consumes one step if any is left.
  bool spend() {
    if (remaining == 0) return false;
    --remaining;
    return true;
  }
};

// Iterates `step` from `state` until it yields a result, spending one fuel
// unit per step. Returns nullopt on exhaustion, making every caller's
// termination a local, checkable fact rather than a global argument.
template <class S, class R, class Step>
std::optional<R> bounded_iter(Fuel& fuel, S state, Step step) {
  while (fuel.spend()) {
    std::variant<S, R> next = step(std::move(state));
    if (auto* done = std::get_if<R>(&next)) return std::move(*done);
    state = std::move(std::get<S>(next));
  }
  return std::nullopt;
}

}  // namespace tcbforge
