#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tcbforge/isa.hpp"

namespace tcbforge {

// Timing model the scheduler optimises against. Both tables must cover every
// mnemonic; every named unit has one instance and accepts one instruction per
// cycle, with at most `slots` issues per cycle overall.
struct MachineDesc {
  unsigned slots = 1;
  std::map<std::string, unsigned> latency;
  std::map<std::string, std::string> unit;
  std::map<std::string, unsigned> unit_count;  // instances per unit, default 1

  unsigned latency_of(const Instruction& i) const;
  const std::string& unit_of(const Instruction& i) const;
  unsigned count_of(const std::string& unit_name) const;
  std::vector<std::string> unit_names() const;
};

// Dual-issue model: 3-cycle multiplies and loads, everything else 1 cycle.
MachineDesc default_machine();

// Text format, one directive per line ('#' starts a comment):
//   slots <n>
//   latency <mnemonic> <cycles>
//   unit <mnemonic> <unit-name>
// Both tables must end up total; throws ParseError with a line number.
MachineDesc parse_machine(std::istream& in);
MachineDesc load_machine(const std::string& path);

}  // namespace tcbforge
