#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcbforge/asmtext.hpp"
#include "tcbforge/fuzz.hpp"
#include "tcbforge/interp.hpp"

namespace {

using namespace tcbforge;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) toks.push_back(std::move(cur));
  return toks;
}

Reg parse_reg_tok(const std::string& tok, int line) {
  if (tok.size() < 2 || tok[0] != 'r')
    throw ParseError(line, "expected register, got '" + tok + "'");
  unsigned n = 0;
  auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), n);
  if (ec != std::errc() || p != tok.data() + tok.size() || n >= kNumRegs)
    throw ParseError(line, "bad register '" + tok + "'");
  return Reg(n);
}

std::uint64_t parse_u64_tok(const std::string& tok, int line) {
  std::uint64_t n = 0;
  bool neg = !tok.empty() && tok[0] == '-';
  const char* first = tok.data() + (neg ? 1 : 0);
  auto [p, ec] = std::from_chars(first, tok.data() + tok.size(), n);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "bad integer '" + tok + "'");
  return neg ? ~n + 1 : n;
}

// Program text: the canonical assembly grammar extended with pseudo lines
//   memcpy rD, rS, <size>, <align>
//   loadimm64 rD, <imm>
// so expansion inputs are expressible as plain files.
Block parse_program(const std::string& text) {
  std::vector<Instruction> instrs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    try {
      if (toks[0] == "memcpy") {
        if (toks.size() != 5)
          throw ParseError(line_no, "memcpy takes rD, rS, <size>, <align>");
        instrs.push_back(Pseudo{MemCopy(
            parse_reg_tok(toks[1], line_no), parse_reg_tok(toks[2], line_no),
            static_cast<std::uint32_t>(parse_u64_tok(toks[3], line_no)),
            static_cast<std::uint32_t>(parse_u64_tok(toks[4], line_no)))});
      } else if (toks[0] == "loadimm64") {
        if (toks.size() != 3) throw ParseError(line_no, "loadimm64 takes rD, <imm>");
        instrs.push_back(Pseudo{LoadImm64(parse_reg_tok(toks[1], line_no),
                                          parse_u64_tok(toks[2], line_no))});
      } else {
        Block one = parse_block(line);
        instrs.push_back(one.instrs.at(0));
      }
    } catch (const ContractError& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError& e) {
      if (e.line == line_no) throw;
      std::string msg = e.what();
      if (auto at = msg.find(": "); at != std::string::npos) msg = msg.substr(at + 2);
      throw ParseError(line_no, msg);
    }
  }
  return Block(std::move(instrs));
}

std::string print_program(const Block& b) {
  PrintTable t = PrintTable::canonical();
  std::ostringstream os;
  for (const Instruction& i : b.instrs) {
    if (const auto* ps = std::get_if<Pseudo>(&i)) {
      if (const auto* mc = std::get_if<MemCopy>(&ps->p))
        os << "memcpy r" << mc->dst().index() << ", r" << mc->src().index()
           << ", " << mc->size() << ", " << mc->align() << "\n";
      else
        os << "loadimm64 r" << std::get<LoadImm64>(ps->p).rd().index() << ", "
           << std::get<LoadImm64>(ps->p).imm() << "\n";
    } else {
      os << print_instruction(i, t) << "\n";
    }
  }
  return os.str();
}

struct GlobalOpts {
  std::string machine_path;
  std::uint64_t seed = 1;
  std::uint64_t fuel = kDefaultFuel;

  MachineDesc machine() const {
    return machine_path.empty() ? default_machine() : load_machine(machine_path);
  }
};

int cmd_gen(const GlobalOpts& g, const FuzzConfig& cfg) {
  auto [b, s0] = gen_block(g.seed, cfg);
  (void)s0;
  std::cout << "# tcb-forge gen seed=" << g.seed << "\n" << print_program(b);
  return 0;
}

int cmd_sched(const GlobalOpts& g, const std::string& path) {
  MachineDesc m = g.machine();
  Block b = expand_block(parse_program(slurp(path)));
  Fuel fuel{g.fuel};
  ScheduleResult sr = list_schedule(b, m, g.seed, fuel);
  if (sr.fuel_exhausted) std::cerr << "fuel exhausted; keeping input order\n";
  InternContext ctx;
  Verdict v = equiv_check(ctx, b, sr.block);
  if (!v) {
    std::cerr << to_string(v) << "\n";
    return 1;
  }
  std::cout << print_block(sr.block);
  std::cout << "cycles: " << pipeline_sim(b, m) << " -> "
            << pipeline_sim(sr.block, m) << "\n";
  return 0;
}

int cmd_check(const std::string& path1, const std::string& path2) {
  Block b1 = expand_block(parse_program(slurp(path1)));
  Block b2 = expand_block(parse_program(slurp(path2)));
  InternContext ctx;
  Verdict v = equiv_check(ctx, b1, b2);
  std::cout << to_string(v) << "\n";
  return v ? 0 : 1;
}

int cmd_expand(const GlobalOpts& g, const std::string& path, bool validate,
               const std::string& fault_name) {
  std::optional<FaultKind> fk = fault_of(fault_name);
  if (!fk) throw ParseError(0, "unknown fault '" + fault_name + "'");
  ExpandFault ef = ExpandFault::None;
  switch (*fk) {
    case FaultKind::UndeclaredClobber: ef = ExpandFault::UndeclaredClobber; break;
    case FaultKind::MemcpyAlias: ef = ExpandFault::AliasWrongOrder; break;
    case FaultKind::MemcpySwap: ef = ExpandFault::SwapSrcDst; break;
    case FaultKind::MemcpyBadOffset: ef = ExpandFault::StraightEverywhere; break;
    case FaultKind::None: break;
    default: throw ParseError(0, "'" + fault_name + "' is not an expander fault");
  }

  Block b = parse_program(slurp(path));
  std::vector<Instruction> out;
  int pseudo_no = 0;
  bool any_rejected = false;
  for (const Instruction& i : b.instrs) {
    const auto* ps = std::get_if<Pseudo>(&i);
    if (!ps) {
      out.push_back(i);
      continue;
    }
    ++pseudo_no;
    std::vector<Instruction> exp;
    std::string verdict_line;
    bool rejected = false;
    try {
      exp = expand_with_fault(ps->p, ef);
      if (validate) {
        Verdict v = validate_expansion(ps->p, exp, {512, g.seed});
        verdict_line = to_string(v);
        rejected = !v;
      }
    } catch (const ContractError& e) {
      verdict_line = std::string("REJECTED construction: ") + e.what();
      rejected = true;
    }
    if (validate || rejected)
      std::cout << "# pseudo " << pseudo_no << ": " << verdict_line << "\n";
    if (rejected) {
      any_rejected = true;
      exp = expand(ps->p);
    }
    out.insert(out.end(), exp.begin(), exp.end());
  }
  std::cout << print_block(Block(std::move(out)));
  return any_rejected ? 1 : 0;
}

int cmd_print(const std::string& path, const std::string& fault_name) {
  PrintFault pf = PrintFault::None;
  if (fault_name == "nand-as-and")
    pf = PrintFault::NandAsAnd;
  else if (fault_name == "fmadd-swap")
    pf = PrintFault::FmaddSwapOperands;
  else if (fault_name == "print-bad-offset")
    pf = PrintFault::OffsetCorrupt;
  else if (fault_name != "none")
    throw ParseError(0, "unknown printer fault '" + fault_name + "'");
  Block b = expand_block(parse_program(slurp(path)));
  try {
    std::cout << print_block(b, make_table(pf));
  } catch (const PrintError& e) {
    std::cerr << "print error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_parse(const std::string& path) {
  Block b = parse_program(slurp(path));
  std::cout << "parsed " << b.instrs.size() << " instructions\n";
  return 0;
}

int cmd_roundtrip(const std::string& path) {
  Block b = parse_program(slurp(path));
  Block again = parse_program(print_program(b));
  if (!(b.instrs == again.instrs)) {
    std::cerr << "round-trip mismatch\n";
    return 1;
  }
  std::cout << "round-trip ok (" << b.instrs.size() << " instructions)\n";
  return 0;
}

int cmd_fuzz(const GlobalOpts& g, FuzzConfig cfg) {
  cfg.seed = g.seed;
  cfg.fuel = g.fuel;
  MachineDesc m = g.machine();
  FuzzReport rep = run_fuzz(cfg, m, std::cout);
  std::cout << "cases: " << rep.cases_run << "\n"
            << "divergences: " << rep.divergences.size() << "\n"
            << "rejects: expand=" << rep.expansion_rejects
            << " sched=" << rep.sched_rejects << " print=" << rep.printer_rejects
            << "\n"
            << "makespan-regressions: " << rep.makespan_regressions << "\n"
            << "shortcut-hits: " << rep.shortcut_hits << "\n";
  return rep.clean() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tcb-forge: checked scheduling, expansion and printing for a "
               "straight-line RISC-like ISA"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--machine", g.machine_path, "machine description file");
  app.add_option("--seed", g.seed, "seed for anything randomized");
  app.add_option("--fuel", g.fuel, "step budget for bounded iteration");

  FuzzConfig cfg;
  std::string in1, in2, fault_name = "none";
  bool validate = false;

  CLI::App* gen = app.add_subcommand("gen", "generate a random program");
  gen->add_option("--len-min", cfg.block_len_min, "minimum block length");
  gen->add_option("--len-max", cfg.block_len_max, "maximum block length");
  gen->add_option("--pseudo-ratio", cfg.pseudo_ratio,
                  "fraction of programs containing pseudo-instructions");
  gen->add_option("--invalid-ratio", cfg.invalid_addr_ratio,
                  "fraction of loads aimed at invalid addresses");

  CLI::App* sched = app.add_subcommand("sched", "schedule a program, checked");
  sched->add_option("file", in1, "program ('-' for stdin)")->required();

  CLI::App* check = app.add_subcommand("check", "equivalence-check two programs");
  check->add_option("file1", in1, "reference program")->required();
  check->add_option("file2", in2, "candidate program")->required();

  CLI::App* expand = app.add_subcommand("expand", "expand pseudo-instructions");
  expand->add_option("file", in1, "program ('-' for stdin)")->required();
  expand->add_flag("--validate", validate, "validate each expansion");
  expand->add_option("--fault", fault_name, "seeded expander fault");

  CLI::App* print = app.add_subcommand("print", "parse and re-print a program");
  print->add_option("file", in1, "program ('-' for stdin)")->required();
  print->add_option("--fault", fault_name, "seeded printer fault");

  CLI::App* parse = app.add_subcommand("parse", "parse a program and report");
  parse->add_option("file", in1, "program ('-' for stdin)")->required();

  CLI::App* roundtrip = app.add_subcommand("roundtrip", "parse, print, re-parse");
  roundtrip->add_option("file", in1, "program ('-' for stdin)")->required();

  CLI::App* fuzz = app.add_subcommand("fuzz", "run the differential pipeline");
  fuzz->add_option("--count", cfg.count, "number of cases");
  fuzz->add_option("--fault", fault_name, "seeded fault for every case");
  fuzz->add_option("--jobs", cfg.jobs, "worker threads");
  fuzz->add_option("--len-min", cfg.block_len_min, "minimum block length");
  fuzz->add_option("--len-max", cfg.block_len_max, "maximum block length");
  fuzz->add_option("--pseudo-ratio", cfg.pseudo_ratio,
                   "fraction of cases containing pseudo-instructions");
  fuzz->add_option("--invalid-ratio", cfg.invalid_addr_ratio,
                   "fraction of loads aimed at invalid addresses");
  fuzz->add_option("--validate-states", cfg.validate_states,
                   "differential states per expansion");

  CLI::App* regress_cmd =
      app.add_subcommand("regress", "replay the known bug classes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(g, cfg);
    if (sched->parsed()) return cmd_sched(g, in1);
    if (check->parsed()) return cmd_check(in1, in2);
    if (expand->parsed()) return cmd_expand(g, in1, validate, fault_name);
    if (print->parsed()) return cmd_print(in1, fault_name);
    if (parse->parsed()) return cmd_parse(in1);
    if (roundtrip->parsed()) return cmd_roundtrip(in1);
    if (fuzz->parsed()) {
      if (std::optional<FaultKind> fk = fault_of(fault_name)) {
        cfg.fault = *fk;
      } else {
        std::cerr << "unknown fault '" << fault_name << "'\n";
        return 2;
      }
      return cmd_fuzz(g, cfg);
    }
    if (regress_cmd->parsed()) return regress(std::cout) == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
