#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcbforge/expand.hpp"
#include "tcbforge/machine_desc.hpp"
#include "tcbforge/schedule.hpp"

namespace tcbforge {

// Seeded defects, one per historical bug class. Each maps onto the stage
// whose validator is supposed to catch it.
enum class FaultKind : std::uint8_t {
  None,
  NandAsAnd,          // printer: nand comes out as and
  FmaddSwap,          // printer: fmadd operands 2 and 3 swapped
  PrintBadOffset,     // printer: offsets biased out of encodable range
  UndeclaredClobber,  // expander: r13 trashed without being declared
  MemcpyAlias,        // expander: wrong-order pair when dst aliases src
  MemcpySwap,         // expander: copy direction reversed
  MemcpyBadOffset,    // expander: straight-line copy for any size; offsets
                      // outgrow the immediate width and construction refuses
  SchedViolateDeps,   // scheduler: adjacent dependent pair swapped
};

const char* name(FaultKind f);
// Maps the CLI spelling (e.g. "nand-as-and") to a kind; nullopt if unknown.
std::optional<FaultKind> fault_of(const std::string& cli_name);

struct FuzzConfig {
  std::uint64_t seed = 1;
  std::size_t count = 10000;
  std::size_t block_len_min = 1, block_len_max = 64;
  std::size_t mem_cells_min = 32, mem_cells_max = 256;
  double pseudo_ratio = 0.25;        // fraction of cases containing pseudos
  double invalid_addr_ratio = 0.05;  // fraction of loads aimed off the map
  FaultKind fault = FaultKind::None;
  std::uint64_t fuel = kDefaultFuel;
  std::size_t validate_states = 64;  // per-pseudo differential states
  unsigned jobs = 1;
};

struct Divergence {
  std::uint64_t seed = 0;
  std::string stage;
  std::uint64_t lhs = 0, rhs = 0;
};

// `DEFECT seed=<n> stage=<name> lhs=<hex> rhs=<hex>`
std::string format_defect(const Divergence& d);

struct CaseOutcome {
  std::optional<Divergence> divergence;
  bool expansion_rejected = false;
  bool sched_rejected = false;
  bool printer_rejected = false;
  bool fuel_exhausted = false;
  std::uint64_t makespan_before = 0, makespan_after = 0;
  std::vector<std::string> reject_log;
};

struct FuzzReport {
  std::size_t cases_run = 0;
  std::vector<Divergence> divergences;
  std::size_t makespan_regressions = 0;
  std::uint64_t shortcut_hits = 0;
  std::size_t expansion_rejects = 0;
  std::size_t sched_rejects = 0;
  std::size_t printer_rejects = 0;

  bool clean() const { return divergences.empty(); }
};

// Deterministic in (seed, cfg). Pointer registers r10..r13 hold addresses
// into the state's valid range and are never written by generated code, so
// most memory traffic lands on the map; a configurable fraction of loads
// deliberately aims outside it.
std::pair<Block, ExecState> gen_block(std::uint64_t seed, const FuzzConfig& cfg);

// One differential case: expand (under the configured fault) → validate each
// expansion, falling back to the clean one on rejection → schedule →
// equiv_check, falling back to the unscheduled block → printer differential,
// falling back to the unprinted block → execute the clean expansion and the
// surviving artifact on s0 and compare checksums. A surviving mismatch is a
// divergence; rejections are the defense working and only get logged.
CaseOutcome run_pipeline(const Block& b, const ExecState& s0,
                         const MachineDesc& m, std::uint64_t seed,
                         const FuzzConfig& cfg);

// Runs `cfg.count` generated cases (concurrently when cfg.jobs > 1), writing
// REJECT/DEFECT lines to `log`.
FuzzReport run_fuzz(const FuzzConfig& cfg, const MachineDesc& m, std::ostream& log);

// Scripted replays of the known bug classes; prints one line per scenario.
// Returns the number of scenarios that went undetected (0 = all caught).
int regress(std::ostream& out);

}  // namespace tcbforge
