#include "tcbforge/fuzz.hpp"

#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <thread>

#include "tcbforge/asmtext.hpp"
#include "tcbforge/depgraph.hpp"
#include "tcbforge/interp.hpp"
#include "tcbforge/rng.hpp"

namespace tcbforge {

const char* name(FaultKind f) {
  switch (f) {
    case FaultKind::None: return "none";
    case FaultKind::NandAsAnd: return "nand-as-and";
    case FaultKind::FmaddSwap: return "fmadd-swap";
    case FaultKind::PrintBadOffset: return "print-bad-offset";
    case FaultKind::UndeclaredClobber: return "undeclared-clobber";
    case FaultKind::MemcpyAlias: return "memcpy-alias";
    case FaultKind::MemcpySwap: return "memcpy-swap";
    case FaultKind::MemcpyBadOffset: return "memcpy-bad-offset";
    case FaultKind::SchedViolateDeps: return "sched-violate-deps";
  }
  return "?";
}

std::optional<FaultKind> fault_of(const std::string& cli_name) {
  for (FaultKind f : {FaultKind::None, FaultKind::NandAsAnd, FaultKind::FmaddSwap,
                      FaultKind::PrintBadOffset, FaultKind::UndeclaredClobber,
                      FaultKind::MemcpyAlias, FaultKind::MemcpySwap,
                      FaultKind::MemcpyBadOffset, FaultKind::SchedViolateDeps})
    if (cli_name == name(f)) return f;
  return std::nullopt;
}

std::string format_defect(const Divergence& d) {
  std::ostringstream os;
  os << "DEFECT seed=" << d.seed << " stage=" << d.stage << " lhs=" << std::hex
     << std::setw(16) << std::setfill('0') << d.lhs << " rhs=" << std::setw(16)
     << std::setfill('0') << d.rhs;
  return os.str();
}

namespace {

constexpr std::uint64_t kHeapBase = 0x10000;

void check_config(const FuzzConfig& cfg) {
  if (cfg.count < 1) throw ContractError("fuzz config: count must be >= 1");
  if (cfg.block_len_min > cfg.block_len_max)
    throw ContractError("fuzz config: empty block-length range");
  if (cfg.mem_cells_min > cfg.mem_cells_max || cfg.mem_cells_min < 1)
    throw ContractError("fuzz config: bad memory range");
  if (cfg.pseudo_ratio < 0 || cfg.pseudo_ratio > 1 || cfg.invalid_addr_ratio < 0 ||
      cfg.invalid_addr_ratio > 1)
    throw ContractError("fuzz config: ratios must be within [0,1]");
  if (cfg.jobs < 1) throw ContractError("fuzz config: jobs must be >= 1");
}

struct Gen {
  Rng rng;
  const FuzzConfig& cfg;
  std::size_t mem_cells;
  HSet written;

  Gen(std::uint64_t seed, const FuzzConfig& c)
      : rng(seed), cfg(c), mem_cells(0), written(default_set_context()) {}

  Reg value_reg() {
    static constexpr unsigned pool[] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 14, 15};
    return Reg(pool[rng.below(std::size(pool))]);
  }
  Reg pointer_reg() { return Reg(10 + static_cast<unsigned>(rng.below(4))); }

  Reg source_reg() {
    if (rng.chance(0.25)) return pointer_reg();
    std::vector<std::uint32_t> w = written.elements();
    if (!w.empty() && rng.chance(0.75)) return Reg(w[rng.below(w.size())]);
    return Reg(static_cast<unsigned>(rng.below(kNumRegs)));
  }

  void note_def(const Instruction& i) {
    if (const auto* ps = std::get_if<Pseudo>(&i)) {
      ClobberSpec spec = clobber_spec(ps->p);
      written = hset_union(written, hset_union(spec.destinations, spec.clobbers));
    } else if (auto rd = def_reg(i)) {
      written = hset_add(written, rd->index());
    }
  }

  Imm12 near_offset() {
    std::uint64_t span = std::min<std::uint64_t>(mem_cells / 2 + 1, 256);
    return Imm12(8 * static_cast<std::int64_t>(rng.below(span)));
  }

  Instruction load() {
    bool wild = rng.chance(cfg.invalid_addr_ratio);
    Reg base = wild ? value_reg() : pointer_reg();
    bool dismissible = wild ? rng.chance(0.75) : rng.chance(0.3);
    if (dismissible) return Sld{value_reg(), near_offset(), base};
    return Ld{value_reg(), near_offset(), base};
  }

  PseudoInstr memcopy(bool force_alias, bool force_big) {
    Reg dst = pointer_reg();
    Reg src = force_alias ? dst : pointer_reg();
    std::uint32_t size;
    if (force_big)
      size = 8 * (257 + static_cast<std::uint32_t>(rng.below(256)));
    else if (rng.chance(0.7))
      size = 8 * static_cast<std::uint32_t>(rng.below(9));
    else
      size = 8 * static_cast<std::uint32_t>(rng.below(513));
    if (force_alias && size == 0) size = 16;
    return MemCopy(dst, src, size, 8);
  }

  PseudoInstr load_imm() {
    Reg rd(static_cast<unsigned>(rng.below(10)));
    std::uint64_t imm = rng.chance(0.5)
                            ? static_cast<std::uint64_t>(rng.range(-32768, 32767))
                            : rng.next();
    return LoadImm64(rd, imm);
  }

  Instruction pseudo() {
    bool alias = cfg.fault == FaultKind::MemcpyAlias;
    bool big = cfg.fault == FaultKind::MemcpyBadOffset;
    bool copy_needed = alias || big || cfg.fault == FaultKind::MemcpySwap;
    if (copy_needed || rng.chance(0.6)) return Pseudo{memcopy(alias, big)};
    return Pseudo{load_imm()};
  }

  Instruction plain() {
    std::uint64_t roll = rng.below(100);
    if (roll < 38) {
      static constexpr BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul,
                                      BinOp::And, BinOp::Or,  BinOp::Xor,
                                      BinOp::Nand, BinOp::Sll, BinOp::Srl};
      return BinR{ops[rng.below(std::size(ops))], value_reg(), source_reg(),
                  source_reg()};
    }
    if (roll < 50) return AddI{value_reg(), source_reg(), Imm12(rng.range(-2048, 2047))};
    if (roll < 60) return MovI{value_reg(), Imm16(rng.range(-32768, 32767))};
    if (roll < 70) return Fmadd{value_reg(), source_reg(), source_reg(), source_reg()};
    if (roll < 88) return load();
    return Sd{source_reg(), near_offset(), pointer_reg()};
  }
};

// Post-pass: a fault run is only informative if the affected construct shows
// up, so plant one when the generator happened not to roll it.
void guarantee_fault_target(Gen& g, std::vector<Instruction>& instrs,
                            FaultKind fault) {
  if (instrs.empty()) return;
  auto slot = [&]() -> Instruction& { return instrs[g.rng.below(instrs.size())]; };
  auto any_of = [&](auto pred) {
    for (const Instruction& i : instrs)
      if (pred(i)) return true;
    return false;
  };
  switch (fault) {
    case FaultKind::None:
      break;
    case FaultKind::NandAsAnd:
      if (!any_of([](const Instruction& i) {
            const auto* b = std::get_if<BinR>(&i);
            return b && b->op == BinOp::Nand;
          }))
        slot() = BinR{BinOp::Nand, g.value_reg(), g.source_reg(), g.source_reg()};
      break;
    case FaultKind::FmaddSwap:
      if (!any_of([](const Instruction& i) {
            const auto* f = std::get_if<Fmadd>(&i);
            return f && !(f->rs2 == f->rs3);
          }))
        slot() = Fmadd{g.value_reg(), Reg(2), Reg(3), Reg(4)};
      break;
    case FaultKind::PrintBadOffset:
      if (!any_of([](const Instruction& i) { return is_mem_op(i); }))
        slot() = Ld{g.value_reg(), Imm12(0), g.pointer_reg()};
      break;
    case FaultKind::UndeclaredClobber:
      if (!any_of([](const Instruction& i) { return is_pseudo(i); }))
        slot() = g.pseudo();
      break;
    case FaultKind::MemcpyAlias:
    case FaultKind::MemcpySwap:
    case FaultKind::MemcpyBadOffset: {
      bool alias = fault == FaultKind::MemcpyAlias;
      bool big = fault == FaultKind::MemcpyBadOffset;
      if (!any_of([&](const Instruction& i) {
            const auto* ps = std::get_if<Pseudo>(&i);
            const auto* mc = ps ? std::get_if<MemCopy>(&ps->p) : nullptr;
            if (!mc || mc->size() == 0) return false;
            if (alias && !(mc->dst() == mc->src())) return false;
            if (big && mc->size() <= 2048) return false;
            return true;
          }))
        slot() = Pseudo{g.memcopy(alias, big)};
      break;
    }
    case FaultKind::SchedViolateDeps:
      if (instrs.size() >= 2) {
        std::size_t at = g.rng.below(instrs.size() - 1);
        instrs[at] = MovI{Reg(0), Imm16(7)};
        instrs[at + 1] = BinR{BinOp::Add, Reg(1), Reg(0), Reg(0)};
      }
      break;
  }
}

}  // namespace

std::pair<Block, ExecState> gen_block(std::uint64_t seed, const FuzzConfig& cfg) {
  check_config(cfg);
  Gen g(seed, cfg);

  g.mem_cells = cfg.mem_cells_min + g.rng.below(cfg.mem_cells_max - cfg.mem_cells_min + 1);
  ExecState s0;
  s0.mem.add_valid_range(kHeapBase, kHeapBase + 8 * g.mem_cells);
  for (unsigned r = 0; r < kNumRegs; ++r)
    s0.regs[r] = g.rng.chance(0.1) ? Value::undef() : Value::i64(g.rng.next());
  for (unsigned r = 10; r <= 13; ++r)
    s0.regs[r] = Value::i64(kHeapBase + 8 * g.rng.below(g.mem_cells / 2 + 1));
  for (std::size_t i = 0; i < g.mem_cells / 2; ++i) {
    Value v = g.rng.chance(0.1) ? Value::undef() : Value::i64(g.rng.next());
    s0.mem.store(kHeapBase + 8 * g.rng.below(g.mem_cells), v);
  }

  std::size_t len =
      cfg.block_len_min + g.rng.below(cfg.block_len_max - cfg.block_len_min + 1);
  int pseudo_budget = 0;
  if (g.rng.chance(cfg.pseudo_ratio)) pseudo_budget = g.rng.chance(0.3) ? 2 : 1;

  std::vector<Instruction> instrs;
  instrs.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    std::size_t left = len - k;
    bool emit_pseudo =
        pseudo_budget > 0 && g.rng.chance(static_cast<double>(pseudo_budget) / left);
    Instruction ins = emit_pseudo ? g.pseudo() : g.plain();
    if (emit_pseudo) --pseudo_budget;
    instrs.push_back(ins);
    g.note_def(ins);
  }
  guarantee_fault_target(g, instrs, cfg.fault);

  return {Block(std::move(instrs)), std::move(s0)};
}

namespace {

ExpandFault expand_fault_of(FaultKind f) {
  switch (f) {
    case FaultKind::UndeclaredClobber: return ExpandFault::UndeclaredClobber;
    case FaultKind::MemcpyAlias: return ExpandFault::AliasWrongOrder;
    case FaultKind::MemcpySwap: return ExpandFault::SwapSrcDst;
    case FaultKind::MemcpyBadOffset: return ExpandFault::StraightEverywhere;
    default: return ExpandFault::None;
  }
}

PrintFault print_fault_of(FaultKind f) {
  switch (f) {
    case FaultKind::NandAsAnd: return PrintFault::NandAsAnd;
    case FaultKind::FmaddSwap: return PrintFault::FmaddSwapOperands;
    case FaultKind::PrintBadOffset: return PrintFault::OffsetCorrupt;
    default: return PrintFault::None;
  }
}

// Swap an adjacent truly-dependent pair, preferring register-dataflow edges:
// their swaps always change the symbolic state, while a conservative MEM
// edge's swap may be harmless.
Block tamper_schedule(Block b) {
  DepGraph g = build_depgraph(b);
  auto adjacent_edge = [&](bool reg_only) -> std::optional<std::size_t> {
    for (const DepEdge& e : g.edges)
      if (e.to == e.from + 1 && (!reg_only || e.kind != DepKind::MEM))
        return e.from;
    return std::nullopt;
  };
  std::optional<std::size_t> at = adjacent_edge(true);
  if (!at) at = adjacent_edge(false);
  if (at) std::swap(b.instrs[*at], b.instrs[*at + 1]);
  return b;
}

}  // namespace

CaseOutcome run_pipeline(const Block& b, const ExecState& s0,
                         const MachineDesc& m, std::uint64_t seed,
                         const FuzzConfig& cfg) {
  CaseOutcome out;
  ExpandFault ef = expand_fault_of(cfg.fault);
  auto log_reject = [&](const char* stage, const std::string& why) {
    out.reject_log.push_back("REJECT seed=" + std::to_string(seed) + " stage=" +
                             stage + " " + why);
  };

  // Expansion stage: the clean expansion is the reference artifact; whatever
  // the (possibly faulty) expander produced must pass validate_expansion or
  // the clean expansion is used instead.
  Block clean({}, b.live_out);
  Block used({}, b.live_out);
  for (const Instruction& i : b.instrs) {
    const auto* ps = std::get_if<Pseudo>(&i);
    if (!ps) {
      clean.instrs.push_back(i);
      used.instrs.push_back(i);
      continue;
    }
    std::vector<Instruction> reference = expand(ps->p);
    clean.instrs.insert(clean.instrs.end(), reference.begin(), reference.end());

    std::vector<Instruction> candidate;
    bool rejected = false;
    try {
      candidate = expand_with_fault(ps->p, ef);
    } catch (const ContractError& e) {
      rejected = true;
      log_reject("expand", std::string("construction refused: ") + e.what());
    }
    if (!rejected) {
      Verdict v = validate_expansion(
          ps->p, candidate, {cfg.validate_states, mix64(seed, 0xE1)});
      if (!v) {
        rejected = true;
        log_reject("expand", to_string(v));
      }
    }
    const std::vector<Instruction>& chosen = rejected ? reference : candidate;
    used.instrs.insert(used.instrs.end(), chosen.begin(), chosen.end());
    out.expansion_rejected |= rejected;
  }

  // Scheduling stage: untrusted output, checked then kept or dropped.
  Fuel fuel{cfg.fuel};
  ScheduleResult sr = list_schedule(used, m, mix64(seed, 0x5C), fuel);
  out.fuel_exhausted = sr.fuel_exhausted;
  Block sched = std::move(sr.block);
  if (cfg.fault == FaultKind::SchedViolateDeps) sched = tamper_schedule(std::move(sched));
  {
    InternContext ctx;
    Verdict v = equiv_check(ctx, used, sched);
    if (!v) {
      out.sched_rejected = true;
      log_reject("sched", to_string(v));
      sched = used;
    }
  }
  out.makespan_before = pipeline_sim(used, m);
  out.makespan_after = pipeline_sim(sched, m);

  // Printing stage: print through the (possibly faulty) table, re-parse with
  // the canonical grammar, require structural and checksum agreement.
  Verdict pd = printer_differential(sched, print_fault_of(cfg.fault),
                                    {12, mix64(seed, 0xF2)});
  if (!pd) {
    out.printer_rejected = true;
    log_reject("print", to_string(pd));
  }
  Block final_block = pd ? parse_block(print_block(sched)) : sched;

  std::uint64_t lhs = checksum(exec_block(clean, s0));
  std::uint64_t rhs = checksum(exec_block(final_block, s0));
  if (lhs != rhs) out.divergence = Divergence{seed, "final", lhs, rhs};
  return out;
}

FuzzReport run_fuzz(const FuzzConfig& cfg, const MachineDesc& m, std::ostream& log) {
  check_config(cfg);
  FuzzReport total;
  total.cases_run = cfg.count;

  struct Part {
    FuzzReport rep;
    std::vector<std::string> lines;
  };
  std::vector<Part> parts(cfg.jobs);

  auto worker = [&](unsigned w) {
    Part& part = parts[w];
    std::uint64_t hits0 = default_set_context().shortcut_hits();
    for (std::size_t i = w; i < cfg.count; i += cfg.jobs) {
      std::uint64_t case_seed = mix64(cfg.seed, i);
      auto [b, s0] = gen_block(case_seed, cfg);
      CaseOutcome oc = run_pipeline(b, s0, m, case_seed, cfg);
      for (std::string& l : oc.reject_log) part.lines.push_back(std::move(l));
      if (oc.divergence) {
        part.lines.push_back(format_defect(*oc.divergence));
        part.rep.divergences.push_back(*oc.divergence);
      }
      part.rep.expansion_rejects += oc.expansion_rejected;
      part.rep.sched_rejects += oc.sched_rejected;
      part.rep.printer_rejects += oc.printer_rejected;
      part.rep.makespan_regressions += oc.makespan_after > oc.makespan_before;
    }
    part.rep.shortcut_hits = default_set_context().shortcut_hits() - hits0;
  };

  if (cfg.jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < cfg.jobs; ++w) threads.emplace_back(worker, w);
    for (std::thread& t : threads) t.join();
  }

  for (Part& part : parts) {
    for (const std::string& l : part.lines) log << l << '\n';
    total.divergences.insert(total.divergences.end(), part.rep.divergences.begin(),
                             part.rep.divergences.end());
    total.makespan_regressions += part.rep.makespan_regressions;
    total.shortcut_hits += part.rep.shortcut_hits;
    total.expansion_rejects += part.rep.expansion_rejects;
    total.sched_rejects += part.rep.sched_rejects;
    total.printer_rejects += part.rep.printer_rejects;
  }
  return total;
}

int regress(std::ostream& out) {
  int missed = 0;
  auto report = [&](const char* scenario, bool detected, const std::string& how) {
    out << (detected ? "DETECTED" : "MISSED") << " " << scenario << ": " << how
        << "\n";
    if (!detected) ++missed;
  };

  {
    Block b({Fmadd{Reg(1), Reg(2), Reg(3), Reg(4)}});
    Verdict v = printer_differential(b, PrintFault::FmaddSwapOperands);
    report("fmadd-operand-order", !v, to_string(v));
  }
  {
    Block b({BinR{BinOp::Nand, Reg(1), Reg(2), Reg(3)}});
    Verdict v = printer_differential(b, PrintFault::NandAsAnd);
    report("nand-printed-as-and", !v, to_string(v));
  }
  {
    bool offsets_refused = false;
    try {
      expand_with_fault(MemCopy(Reg(1), Reg(2), 4096, 8),
                        ExpandFault::StraightEverywhere);
    } catch (const ContractError&) {
      offsets_refused = true;
    }
    bool align_refused = false;
    try {
      MemCopy(Reg(1), Reg(2), 16, 4);
    } catch (const ContractError&) {
      align_refused = true;
    }
    bool size_refused = false;
    try {
      MemCopy(Reg(1), Reg(2), 12, 8);
    } catch (const ContractError&) {
      size_refused = true;
    }
    report("memcpy-offset-alignment", offsets_refused && align_refused && size_refused,
           "out-of-range offsets and bad shapes refused at construction");
  }
  {
    PseudoInstr p = MemCopy(Reg(1), Reg(1), 16, 8);
    std::vector<Instruction> e = expand_with_fault(p, ExpandFault::AliasWrongOrder);
    Verdict v = validate_expansion(p, e);
    report("memcpy-aliasing", !v, to_string(v));
  }
  {
    ExecState s;  // no valid ranges: every address is off the map
    s.regs[2] = Value::i64(64);
    exec_instr(Sld{Reg(1), Imm12(0), Reg(2)}, s);
    bool undef = !s.trapped() && !s.regs[1].defined();
    bool never_zero = !(s.regs[1] == Value::i64(0));
    bool refinable = refines(Value::i64(12345), s.regs[1]);
    report("speculative-load-undef", undef && never_zero && refinable,
           "dismissed load yields Undef, refinable by any value");
  }
  return missed;
}

}  // namespace tcbforge
