#pragma once

#include <string>

#include "tcbforge/symexec.hpp"

namespace tcbforge {

// First three reasons come out of equiv_check; the rest are produced by the
// expansion validator and the printer round-trip, which reuse Verdict as
// their result type.
enum class RejectKind : std::uint8_t {
  RegisterMismatch,
  MemoryMismatch,
  TrapSetMismatch,
  StructuralMismatch,
  ChecksumMismatch,
  PrintError,
  ParseError,
};

struct Verdict {
  bool equivalent = false;
  RejectKind reason = RejectKind::RegisterMismatch;
  unsigned reg = 0;         // meaningful for RegisterMismatch
  std::string detail;       // optional human-readable context

  explicit operator bool() const { return equivalent; }

  static Verdict accept() { return Verdict{true, RejectKind::RegisterMismatch, 0, {}}; }
  static Verdict reject(RejectKind k, std::string detail = {}) {
    return Verdict{false, k, 0, std::move(detail)};
  }
  static Verdict reject_reg(unsigned r, std::string detail = {}) {
    return Verdict{false, RejectKind::RegisterMismatch, r, std::move(detail)};
  }
};

std::string to_string(const Verdict& v);

// Decides whether b2 is an acceptable replacement for b1: every live-out
// register and the final memory must be the same term, and b2 may not trap on
// any initial state where b1 runs to completion (its trap-address set must be
// a subset of b1's). Sound but incomplete: terms are compared structurally,
// with no algebraic reasoning. Blocks must agree on live_out.
Verdict equiv_check(InternContext& ctx, const Block& b1, const Block& b2);

// Discipline check for nondeterministic untrusted oracles: invokes the oracle
// twice and validates each returned artifact against the original on its own.
// True iff both artifacts independently pass — the verdict never depends on
// comparing two invocations with each other.
template <class Oracle>
bool oracle_twice_consistency(const Block& original, Oracle oracle) {
  for (int run = 0; run < 2; ++run) {
    InternContext ctx;
    Block artifact = oracle();
    if (!equiv_check(ctx, original, artifact)) return false;
  }
  return true;
}

}  // namespace tcbforge
