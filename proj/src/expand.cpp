#include "tcbforge/expand.hpp"

#include <string>

#include "tcbforge/interp.hpp"
#include "tcbforge/rng.hpp"
#include "tcbforge/symexec.hpp"

namespace tcbforge {

const char* name(VariantKind k) {
  switch (k) {
    case VariantKind::CopyEmpty: return "copy_empty";
    case VariantKind::CopyStraight: return "copy_straight";
    case VariantKind::CopyLoop: return "copy_loop";
    case VariantKind::Imm16: return "imm16";
    case VariantKind::Imm64Full: return "imm64_full";
  }
  return "?";
}

bool applicable(VariantKind k, const PseudoInstr& p) {
  if (const auto* mc = std::get_if<MemCopy>(&p)) {
    switch (k) {
      case VariantKind::CopyEmpty: return mc->size() == 0;
      case VariantKind::CopyStraight: return mc->size() > 0 && mc->size() <= 64;
      case VariantKind::CopyLoop: return mc->size() > 64;
      default: return false;
    }
  }
  const auto& li = std::get<LoadImm64>(p);
  bool small = Imm16::fits(static_cast<std::int64_t>(li.imm()));
  switch (k) {
    case VariantKind::Imm16: return small;
    case VariantKind::Imm64Full: return !small;
    default: return false;
  }
}

Variant select_variant(const PseudoInstr& p) {
  SetContext& ctx = default_set_context();
  if (const auto* mc = std::get_if<MemCopy>(&p)) {
    if (mc->size() == 0) return {VariantKind::CopyEmpty, 0, HSet(ctx)};
    if (mc->size() <= 64)
      return {VariantKind::CopyStraight, mc->size() / 8, regs_of({kScratch1})};
    return {VariantKind::CopyLoop, 0, regs_of({kScratch0, kScratch1})};
  }
  const auto& li = std::get<LoadImm64>(p);
  if (Imm16::fits(static_cast<std::int64_t>(li.imm())))
    return {VariantKind::Imm16, 0, HSet(ctx)};
  return {VariantKind::Imm64Full, 0, HSet(ctx)};
}

ClobberSpec clobber_spec(const PseudoInstr& p) {
  Variant v = select_variant(p);
  ClobberSpec spec{HSet(default_set_context()), v.clobbers, std::nullopt};
  if (const auto* mc = std::get_if<MemCopy>(&p)) {
    if (mc->size() > 0) spec.mem_effect = MemEffect{mc->dst(), mc->size()};
  } else {
    spec.destinations = regs_of({std::get<LoadImm64>(p).rd().index()});
  }
  return spec;
}

namespace {

// ld/sd pairs with in-place offsets; usable while 8*(cells-1) fits 12 bits.
void straight_copy(std::vector<Instruction>& out, Reg dst, Reg src,
                   std::uint32_t cells, bool store_first) {
  for (std::uint32_t k = 0; k < cells; ++k) {
    Imm12 off(8 * static_cast<std::int64_t>(k));
    if (store_first) {
      out.push_back(Sd{Reg(kScratch1), off, dst});
      out.push_back(Ld{Reg(kScratch1), off, src});
    } else {
      out.push_back(Ld{Reg(kScratch1), off, src});
      out.push_back(Sd{Reg(kScratch1), off, dst});
    }
  }
}

// Large offsets no longer fit a load's immediate, so each cell's address is
// materialised in r14 first; r15 carries the data.
void loop_copy(std::vector<Instruction>& out, Reg dst, Reg src,
               std::uint32_t cells, bool store_first) {
  for (std::uint32_t k = 0; k < cells; ++k) {
    Imm16 off(8 * static_cast<std::int64_t>(k));
    auto addr_into_scratch = [&](Reg base) {
      out.push_back(MovI{Reg(kScratch0), off});
      out.push_back(BinR{BinOp::Add, Reg(kScratch0), base, Reg(kScratch0)});
    };
    if (store_first) {
      addr_into_scratch(dst);
      out.push_back(Sd{Reg(kScratch1), Imm12(0), Reg(kScratch0)});
      addr_into_scratch(src);
      out.push_back(Ld{Reg(kScratch1), Imm12(0), Reg(kScratch0)});
    } else {
      addr_into_scratch(src);
      out.push_back(Ld{Reg(kScratch1), Imm12(0), Reg(kScratch0)});
      addr_into_scratch(dst);
      out.push_back(Sd{Reg(kScratch1), Imm12(0), Reg(kScratch0)});
    }
  }
}

// Builds a 64-bit constant in rd alone. The ISA only shifts by register
// amounts, so shift-left-by-one is spelled add rd, rd, rd; each 16-bit chunk
// is folded in as an 11-bit and a 5-bit immediate, staying inside addi's
// range. Wraparound makes the result exact regardless of the top chunk's
// sign extension.
void imm64_full(std::vector<Instruction>& out, Reg rd, std::uint64_t imm) {
  auto chunk = [imm](int c) { return static_cast<std::uint16_t>(imm >> (48 - 16 * c)); };
  out.push_back(MovI{rd, Imm16(static_cast<std::int16_t>(chunk(0)))});
  for (int c = 1; c < 4; ++c) {
    std::uint16_t ch = chunk(c);
    for (int i = 0; i < 11; ++i) out.push_back(BinR{BinOp::Add, rd, rd, rd});
    out.push_back(AddI{rd, rd, Imm12(ch >> 5)});
    for (int i = 0; i < 5; ++i) out.push_back(BinR{BinOp::Add, rd, rd, rd});
    out.push_back(AddI{rd, rd, Imm12(ch & 31)});
  }
}

}  // namespace

std::vector<Instruction> expand_with_fault(const PseudoInstr& p, ExpandFault f) {
  std::vector<Instruction> out;
  Variant v = select_variant(p);
  VariantKind kind = v.kind;
  if (f == ExpandFault::StraightEverywhere && kind == VariantKind::CopyLoop)
    kind = VariantKind::CopyStraight;

  switch (kind) {
    case VariantKind::CopyEmpty:
      break;
    case VariantKind::CopyStraight:
    case VariantKind::CopyLoop: {
      const auto& mc = std::get<MemCopy>(p);
      Reg dst = mc.dst(), src = mc.src();
      if (f == ExpandFault::SwapSrcDst) std::swap(dst, src);
      bool store_first = f == ExpandFault::AliasWrongOrder && dst == src;
      if (kind == VariantKind::CopyStraight)
        straight_copy(out, dst, src, mc.size() / 8, store_first);
      else
        loop_copy(out, dst, src, mc.size() / 8, store_first);
      break;
    }
    case VariantKind::Imm16: {
      const auto& li = std::get<LoadImm64>(p);
      out.push_back(MovI{li.rd(), Imm16(static_cast<std::int64_t>(li.imm()))});
      break;
    }
    case VariantKind::Imm64Full: {
      const auto& li = std::get<LoadImm64>(p);
      imm64_full(out, li.rd(), li.imm());
      break;
    }
  }
  if (f == ExpandFault::UndeclaredClobber)
    out.push_back(MovI{Reg(13), Imm16(1)});
  return out;
}

std::vector<Instruction> expand(const PseudoInstr& p) {
  return expand_with_fault(p, ExpandFault::None);
}

Block expand_block(const Block& b, ExpandFault f) {
  Block out({}, b.live_out);
  for (const Instruction& i : b.instrs) {
    if (const auto* ps = std::get_if<Pseudo>(&i)) {
      for (Instruction& e : expand_with_fault(ps->p, f)) out.instrs.push_back(e);
    } else {
      out.instrs.push_back(i);
    }
  }
  if (out.instrs.size() > Block::kMaxLen) throw ContractError("block too long");
  return out;
}

void exec_pseudo(const PseudoInstr& p, ExecState& s) {
  if (s.trapped()) return;
  if (const auto* mc = std::get_if<MemCopy>(&p)) {
    std::uint32_t cells = mc->size() / 8;
    if (cells > 0) {
      Value srcv = s.regs[mc->src().index()];
      Value dstv = s.regs[mc->dst().index()];
      if (!srcv.defined() || !dstv.defined()) {
        s.trap = TrapCause::UndefAddress;
        return;
      }
      for (std::uint32_t k = 0; k < cells; ++k) {
        if (!s.mem.valid_address(srcv.bits() + 8 * k) ||
            !s.mem.valid_address(dstv.bits() + 8 * k)) {
          s.trap = TrapCause::InvalidAddress;
          return;
        }
      }
      for (std::uint32_t k = 0; k < cells; ++k)
        s.mem.store(dstv.bits() + 8 * k, s.mem.load(srcv.bits() + 8 * k));
    }
    for (std::uint32_t r : select_variant(p).clobbers.elements())
      s.regs[r] = Value::undef();
  } else {
    const auto& li = std::get<LoadImm64>(p);
    s.regs[li.rd().index()] = Value::i64(li.imm());
  }
}

namespace {

constexpr std::uint64_t kHeapLo = 0x10000;
constexpr std::uint64_t kHeapHi = 0x30000;
constexpr std::uint64_t kHeapCells = (kHeapHi - kHeapLo) / 8;

void fill_region(Rng& rng, ExecState& s, std::uint64_t base, std::uint32_t cells,
                 std::uint32_t max_fill) {
  std::uint32_t n = std::min(cells, max_fill);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t addr = base + 8 * (cells <= max_fill ? i : rng.below(cells));
    Value v = rng.chance(0.1) ? Value::undef() : Value::i64(rng.next());
    s.mem.store(addr, v);
  }
}

ExecState base_state(Rng& rng) {
  ExecState s;
  s.mem.add_valid_range(kHeapLo, kHeapHi);
  for (unsigned r = 0; r < kNumRegs; ++r)
    s.regs[r] = rng.chance(0.1) ? Value::undef() : Value::i64(rng.next());
  return s;
}

// Copy states: place src/dst and load the source region with data.
ExecState copy_state(Rng& rng, const MemCopy& mc, std::uint64_t src,
                     std::uint64_t dst) {
  ExecState s = base_state(rng);
  s.regs[mc.src().index()] = Value::i64(src);
  s.regs[mc.dst().index()] = Value::i64(dst);
  std::uint32_t cells = mc.size() / 8;
  fill_region(rng, s, src, cells, 48);
  fill_region(rng, s, dst, cells, 16);
  fill_region(rng, s, kHeapLo, static_cast<std::uint32_t>(kHeapCells), 8);
  return s;
}

std::vector<ExecState> copy_states(Rng& rng, const MemCopy& mc,
                                   const ValidateOptions& opts) {
  std::vector<ExecState> states;
  std::uint32_t cells = mc.size() / 8;
  std::uint64_t room = kHeapCells - cells;

  auto slot = [&](std::uint64_t cell_index) { return kHeapLo + 8 * cell_index; };

  for (std::size_t i = 0; i < opts.random_states; ++i)
    states.push_back(copy_state(rng, mc, slot(rng.below(room + 1)), slot(rng.below(room + 1))));

  // Placement matrix: identical bases, every small overlap distance in both
  // directions, and a few far-apart splits.
  std::vector<std::int64_t> deltas;
  for (std::int64_t d = -8; d <= 8; ++d) deltas.push_back(d);
  if (cells > 16) {
    deltas.push_back(static_cast<std::int64_t>(cells) / 2);
    deltas.push_back(-static_cast<std::int64_t>(cells) / 2);
    deltas.push_back(static_cast<std::int64_t>(cells) - 1);
    deltas.push_back(-(static_cast<std::int64_t>(cells) - 1));
  }
  for (std::int64_t d : deltas) {
    std::uint64_t src_cell = kHeapCells / 2;
    auto dst_cell = static_cast<std::uint64_t>(static_cast<std::int64_t>(src_cell) + d);
    if (dst_cell > room || src_cell > room) continue;
    states.push_back(copy_state(rng, mc, slot(src_cell), slot(dst_cell)));
  }

  if (cells > 0) {
    // Undef bases trap.
    ExecState s = copy_state(rng, mc, slot(0), slot(room));
    s.regs[mc.src().index()] = Value::undef();
    states.push_back(s);
    s = copy_state(rng, mc, slot(0), slot(room));
    s.regs[mc.dst().index()] = Value::undef();
    states.push_back(s);
    // Invalid placements: fully outside, straddling the end, unaligned,
    // and wrapping around the top of the address space.
    states.push_back(copy_state(rng, mc, 0, slot(0)));
    states.push_back(copy_state(rng, mc, slot(0), kHeapHi));
    states.push_back(copy_state(rng, mc, kHeapHi - 8 * ((cells + 1) / 2), slot(0)));
    ExecState u = copy_state(rng, mc, slot(1), slot(room / 2));
    u.regs[mc.src().index()] = Value::i64(slot(1) + 4);
    states.push_back(u);
    states.push_back(copy_state(rng, mc, static_cast<std::uint64_t>(-8), slot(0)));
  }
  return states;
}

std::vector<ExecState> imm_states(Rng& rng, const LoadImm64& li,
                                  const ValidateOptions& opts) {
  std::vector<ExecState> states;
  for (std::size_t i = 0; i < opts.random_states; ++i)
    states.push_back(base_state(rng));
  ExecState s = base_state(rng);
  s.regs[li.rd().index()] = Value::undef();
  states.push_back(s);
  return states;
}

}  // namespace

Verdict validate_expansion(const PseudoInstr& p,
                           const std::vector<Instruction>& expansion,
                           const ValidateOptions& opts) {
  ClobberSpec spec = clobber_spec(p);

  InternContext ctx;
  Block eb(expansion);
  SymbolicState sym = symb_exec(ctx, eb);
  for (unsigned r = 0; r < kNumRegs; ++r) {
    if (sym.reg_terms[r] == ctx.intern(tags::init_reg(r), {})) continue;
    if (spec.destinations.mem(r) || spec.clobbers.mem(r)) continue;
    return Verdict::reject_reg(r, "undeclared register write");
  }
  if (!spec.mem_effect) {
    if (!(sym.mem_term == ctx.intern(tags::init_mem(), {})))
      return Verdict::reject(RejectKind::MemoryMismatch, "undeclared memory write");
    if (!sym.trap_terms.empty())
      return Verdict::reject(RejectKind::TrapSetMismatch, "undeclared trapping access");
  }

  Rng rng(opts.seed);
  std::vector<ExecState> states;
  if (const auto* mc = std::get_if<MemCopy>(&p))
    states = copy_states(rng, *mc, opts);
  else
    states = imm_states(rng, std::get<LoadImm64>(p), opts);

  for (std::size_t i = 0; i < states.size(); ++i) {
    ExecState ref = states[i];
    exec_pseudo(p, ref);
    ExecState got = exec_block(eb, states[i]);
    if (!state_refines(got, ref))
      return Verdict::reject(RejectKind::ChecksumMismatch,
                             "differential mismatch on state " + std::to_string(i));
  }
  return Verdict::accept();
}

}  // namespace tcbforge
