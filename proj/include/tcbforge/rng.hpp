#pragma once

#include <cstdint>
#include <random>

namespace tcbforge {

// Deterministic random source. The engine (mt19937_64) is fully specified by
// the standard; the std distributions are not, so the range mappings here are
// hand-rolled to keep generated corpora reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Inclusive on both ends.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool chance(double p) { return (next() >> 11) * 0x1.0p-53 < p; }

 private:
  std::mt19937_64 eng_;
};

// splitmix64 finalizer; used for checksums and for deriving per-case seeds.
inline std::uint64_t mix64(std::uint64_t h, std::uint64_t x) {
  std::uint64_t z = (h ^ x) + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace tcbforge
