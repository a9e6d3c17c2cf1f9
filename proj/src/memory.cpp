#include "tcbforge/memory.hpp"

#include "tcbforge/rng.hpp"

namespace tcbforge {

namespace {

constexpr std::uint64_t kChecksumSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kUndefTag = 0xdeadULL;
constexpr std::uint64_t kConcreteTag = 1;

std::uint64_t fold_value(std::uint64_t h, Value v) {
  if (!v.defined()) return mix64(h, kUndefTag);
  return mix64(mix64(h, kConcreteTag), v.bits());
}

}  // namespace

std::uint64_t checksum(const ExecState& s) {
  if (s.trapped()) return kTrappedChecksum;
  std::uint64_t h = kChecksumSeed;
  for (const Value& v : s.regs) h = fold_value(h, v);
  for (const auto& [addr, v] : s.mem.cells()) {
    h = mix64(h, addr);
    h = fold_value(h, v);
  }
  return h;
}

bool state_refines(const ExecState& s1, const ExecState& s2) {
  if (s1.trapped() != s2.trapped()) return false;
  if (s1.trapped()) return true;  // trapped states form one observation class
  for (unsigned r = 0; r < kNumRegs; ++r)
    if (!refines(s1.regs[r], s2.regs[r])) return false;
  const auto& c1 = s1.mem.cells();
  const auto& c2 = s2.mem.cells();
  for (const auto& [addr, v] : c1)
    if (!refines(v, s2.mem.load(addr))) return false;
  for (const auto& [addr, v] : c2)
    if (!refines(s1.mem.load(addr), v)) return false;
  return true;
}

bool states_agree(const ExecState& s1, const ExecState& s2) {
  return state_refines(s1, s2) && state_refines(s2, s1);
}

}  // namespace tcbforge
