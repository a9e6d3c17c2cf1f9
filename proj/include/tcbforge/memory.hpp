#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tcbforge/isa.hpp"

namespace tcbforge {

// Sparse 64-bit memory over 8-byte cells. Addresses are valid when 8-aligned
// and inside one of the [lo, hi) ranges; valid cells that were never written
// read as zero. Accesses outside the valid ranges trap (or are dismissed,
// for Sld).
class MemoryState {
 public:
  void add_valid_range(std::uint64_t lo, std::uint64_t hi) {
    if (lo % 8 != 0 || hi % 8 != 0 || lo > hi)
      throw ContractError("malformed valid range");
    ranges_.emplace_back(lo, hi);
  }

  bool valid_address(std::uint64_t addr) const {
    if (addr % 8 != 0) return false;
    for (auto [lo, hi] : ranges_)
      if (addr >= lo && addr < hi) return true;
    return false;
  }

  Value load(std::uint64_t addr) const {
    auto it = cells_.find(addr);
    return it == cells_.end() ? Value::i64(0) : it->second;
  }

  void store(std::uint64_t addr, Value v) {
    if (v == Value::i64(0))
      cells_.erase(addr);  // keep the map canonical: zero is the default
    else
      cells_[addr] = v;
  }

  const std::map<std::uint64_t, Value>& cells() const { return cells_; }
  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& ranges() const {
    return ranges_;
  }

 private:
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges_;
  std::map<std::uint64_t, Value> cells_;
};

enum class TrapCause : std::uint8_t { InvalidAddress, UndefAddress };

// A trap ends execution; the rest of the block is not run.
struct ExecState {
  std::array<Value, kNumRegs> regs{};
  MemoryState mem;
  std::optional<TrapCause> trap;

  bool trapped() const { return trap.has_value(); }

  static ExecState zeroed() { return ExecState{}; }
};

// Observation checksum over a final state. All trapped states collapse to one
// distinguished value; otherwise every register (index order) and every
// nonzero memory cell (address order) is folded in, with Undef tagged apart
// from any concrete value.
std::uint64_t checksum(const ExecState& s);
inline constexpr std::uint64_t kTrappedChecksum = 0x7472617070656421ULL;  // "trapped!"

// s1 refines s2: same trap outcome; when neither trapped, every register and
// memory cell of s1 is an acceptable concretisation of s2's.
bool state_refines(const ExecState& s1, const ExecState& s2);

// Exact agreement (refinement both ways).
bool states_agree(const ExecState& s1, const ExecState& s2);

}  // namespace tcbforge
