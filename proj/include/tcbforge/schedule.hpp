#pragma once

#include "tcbforge/depgraph.hpp"
#include "tcbforge/fuel.hpp"
#include "tcbforge/machine_desc.hpp"

namespace tcbforge {

struct ScheduleResult {
  Block block;
  bool fuel_exhausted = false;
};

// Greedy cycle-by-cycle list scheduling: per cycle, issue up to `slots` ready
// instructions (one per functional unit), preferring the longest critical
// path; ties are broken by a seed-derived shuffle so distinct seeds explore
// distinct valid orders. The result is untrusted by construction — callers
// must put it through equiv_check. On fuel exhaustion the input block comes
// back unchanged with the flag set.
ScheduleResult list_schedule(const Block& b, const MachineDesc& m,
                             std::uint64_t seed, Fuel& fuel);

// Cycle count of an in-order interlocked pipeline running the block: an
// instruction stalls while any source register awaits a write, at most
// `slots` instructions issue per cycle and each unit accepts one. Returns
// one past the last issue cycle (empty block: 0).
std::uint64_t pipeline_sim(const Block& b, const MachineDesc& m);

}  // namespace tcbforge
