#include "tcbforge/machine_desc.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tcbforge/errors.hpp"

namespace tcbforge {

unsigned MachineDesc::latency_of(const Instruction& i) const {
  auto it = latency.find(mnemonic(i));
  if (it == latency.end()) throw ContractError("machine model: no latency entry");
  return it->second;
}

const std::string& MachineDesc::unit_of(const Instruction& i) const {
  auto it = unit.find(mnemonic(i));
  if (it == unit.end()) throw ContractError("machine model: no unit entry");
  return it->second;
}

unsigned MachineDesc::count_of(const std::string& unit_name) const {
  auto it = unit_count.find(unit_name);
  return it == unit_count.end() ? 1 : it->second;
}

std::vector<std::string> MachineDesc::unit_names() const {
  std::vector<std::string> names;
  for (const auto& [mn, u] : unit) {
    if (std::find(names.begin(), names.end(), u) == names.end()) names.push_back(u);
  }
  return names;
}

MachineDesc default_machine() {
  MachineDesc m;
  m.slots = 2;
  for (const char* mn : all_mnemonics()) {
    std::string s = mn;
    bool slow = s == "mul" || s == "fmadd" || s == "ld" || s == "sld";
    m.latency[s] = slow ? 3 : 1;
    if (s == "mul" || s == "fmadd")
      m.unit[s] = "MUL";
    else if (s == "ld" || s == "sld" || s == "sd")
      m.unit[s] = "MEM";
    else
      m.unit[s] = "ALU";
  }
  m.unit_count = {{"ALU", 1}, {"MEM", 1}, {"MUL", 1}};
  return m;
}

namespace {

bool known_mnemonic(const std::string& s) {
  for (const char* mn : all_mnemonics())
    if (s == mn) return true;
  return false;
}

}  // namespace

MachineDesc parse_machine(std::istream& in) {
  MachineDesc m;
  bool saw_slots = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "slots") {
      long n;
      if (!(ls >> n) || n < 1) throw ParseError(lineno, "slots wants a positive count");
      if (saw_slots) throw ParseError(lineno, "duplicate slots directive");
      saw_slots = true;
      m.slots = static_cast<unsigned>(n);
    } else if (word == "latency") {
      std::string mn;
      long n;
      if (!(ls >> mn >> n)) throw ParseError(lineno, "latency wants <mnemonic> <cycles>");
      if (!known_mnemonic(mn)) throw ParseError(lineno, "unknown mnemonic '" + mn + "'");
      if (n < 1) throw ParseError(lineno, "latency must be at least 1");
      if (m.latency.count(mn)) throw ParseError(lineno, "duplicate latency for '" + mn + "'");
      m.latency[mn] = static_cast<unsigned>(n);
    } else if (word == "unit") {
      std::string mn, u;
      if (!(ls >> mn >> u)) throw ParseError(lineno, "unit wants <mnemonic> <unit-name>");
      if (!known_mnemonic(mn)) throw ParseError(lineno, "unknown mnemonic '" + mn + "'");
      if (m.unit.count(mn)) throw ParseError(lineno, "duplicate unit for '" + mn + "'");
      m.unit[mn] = u;
    } else {
      throw ParseError(lineno, "unknown directive '" + word + "'");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(lineno, "trailing junk '" + extra + "'");
  }
  for (const char* mn : all_mnemonics()) {
    if (!m.latency.count(mn))
      throw ParseError(lineno, std::string("missing latency for '") + mn + "'");
    if (!m.unit.count(mn))
      throw ParseError(lineno, std::string("missing unit for '") + mn + "'");
  }
  for (const auto& [mn, u] : m.unit) m.unit_count.emplace(u, 1);
  return m;
}

MachineDesc load_machine(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(0, "cannot open machine file '" + path + "'");
  return parse_machine(f);
}

}  // namespace tcbforge
