#include <doctest.h>

#include "tcbforge/expand.hpp"
#include "tcbforge/interp.hpp"
#include "tcbforge/rng.hpp"

using namespace tcbforge;

namespace {

const Reg r1(1), r2(2), r3(3);

ExecState arena_state(std::uint32_t cells) {
  ExecState s;
  s.mem.add_valid_range(0x10000, 0x10000 + 8ull * cells);
  for (std::uint32_t k = 0; k < cells; ++k)
    s.mem.store(0x10000 + 8ull * k, Value::i64(1000 + k));
  for (unsigned r = 0; r < kNumRegs; ++r) s.regs[r] = Value::i64(7 * r + 1);
  return s;
}

}  // namespace

TEST_CASE("exactly one variant applies to any pseudo") {
  std::vector<PseudoInstr> pseudos;
  for (std::uint32_t size : {0u, 8u, 64u, 72u, 2048u, 4096u})
    pseudos.push_back(MemCopy(r1, r2, size, 8));
  for (std::uint64_t imm :
       {std::uint64_t{0}, std::uint64_t{5}, ~std::uint64_t{0},  // -1 fits movi
        std::uint64_t{32767}, std::uint64_t{32768}, std::uint64_t{1} << 40})
    pseudos.push_back(LoadImm64(r3, imm));

  for (const PseudoInstr& p : pseudos) {
    int hits = 0;
    for (VariantKind k : {VariantKind::CopyEmpty, VariantKind::CopyStraight,
                          VariantKind::CopyLoop, VariantKind::Imm16,
                          VariantKind::Imm64Full})
      hits += applicable(k, p);
    CHECK(hits == 1);
    CHECK(applicable(select_variant(p).kind, p));
  }

  CHECK(select_variant(MemCopy(r1, r2, 0, 8)).kind == VariantKind::CopyEmpty);
  Variant straight = select_variant(MemCopy(r1, r2, 64, 8));
  CHECK(straight.kind == VariantKind::CopyStraight);
  CHECK(straight.n_pairs == 8);
  CHECK(straight.clobbers.elements() == std::vector<std::uint32_t>{15});
  Variant loop = select_variant(MemCopy(r1, r2, 72, 8));
  CHECK(loop.kind == VariantKind::CopyLoop);
  CHECK(loop.clobbers.elements() == std::vector<std::uint32_t>{14, 15});
  CHECK(select_variant(LoadImm64(r3, 5)).kind == VariantKind::Imm16);
  CHECK(select_variant(LoadImm64(r3, 0x10000)).kind == VariantKind::Imm64Full);
}

TEST_CASE("clobber specs declare effects up front and never overlap") {
  for (std::uint32_t size : {0u, 8u, 64u, 72u, 4096u}) {
    ClobberSpec spec = clobber_spec(MemCopy(r1, r2, size, 8));
    CHECK(spec.destinations.is_empty());
    CHECK(hset_inter(spec.destinations, spec.clobbers).is_empty());
    if (size == 0) {
      CHECK_FALSE(spec.mem_effect.has_value());
    } else {
      REQUIRE(spec.mem_effect.has_value());
      CHECK(spec.mem_effect->base == r1);
      CHECK(spec.mem_effect->size == size);
    }
  }
  ClobberSpec li = clobber_spec(LoadImm64(r3, 1ull << 40));
  CHECK(li.destinations.elements() == std::vector<std::uint32_t>{3});
  CHECK(li.clobbers.is_empty());
  CHECK_FALSE(li.mem_effect.has_value());
}

TEST_CASE("pseudo construction refuses malformed arguments") {
  CHECK_THROWS_AS(MemCopy(r1, r2, 16, 4), ContractError);    // alignment
  CHECK_THROWS_AS(MemCopy(r1, r2, 12, 8), ContractError);    // ragged size
  CHECK_THROWS_AS(MemCopy(r1, r2, 4104, 8), ContractError);  // too large
  CHECK_THROWS_AS(MemCopy(Reg(15), r2, 16, 8), ContractError);
  CHECK_THROWS_AS(MemCopy(r1, Reg(14), 16, 8), ContractError);
  CHECK_THROWS_AS(LoadImm64(Reg(15), 1), ContractError);
  CHECK_NOTHROW(MemCopy(r1, r1, 4096, 8));
}

TEST_CASE("expansion goldens") {
  CHECK(expand(MemCopy(r1, r2, 0, 8)).empty());

  std::vector<Instruction> copy = expand(MemCopy(r1, r2, 64, 8));
  REQUIRE(copy.size() == 16);
  CHECK(copy[0] == Instruction{Ld{Reg(15), Imm12(0), r2}});
  CHECK(copy[1] == Instruction{Sd{Reg(15), Imm12(0), r1}});
  CHECK(copy[14] == Instruction{Ld{Reg(15), Imm12(56), r2}});
  CHECK(copy[15] == Instruction{Sd{Reg(15), Imm12(56), r1}});

  std::vector<Instruction> movi = expand(LoadImm64(r3, 5));
  REQUIRE(movi.size() == 1);
  CHECK(movi[0] == Instruction{MovI{r3, Imm16(5)}});

  CHECK(expand(LoadImm64(r3, 1ull << 40)).size() == 55);
  CHECK(expand(MemCopy(r1, r2, 4096, 8)).size() == 6 * 512);
}

TEST_CASE("the 64-bit constant builder is exact modulo 2^64") {
  for (std::uint64_t imm : {1ull << 40, 0xDEADBEEFCAFEBABEull, ~0ull,
                            0x8000000000000000ull, 0x7FFFFFFFFFFFFFFFull,
                            0x0000800000008000ull}) {
    ExecState s = exec_block(Block(expand(LoadImm64(r3, imm))), ExecState::zeroed());
    REQUIRE_FALSE(s.trapped());
    CHECK(s.regs[3] == Value::i64(imm));
    CHECK(s.regs[0] == Value::i64(0));  // nothing else touched
    CHECK(s.regs[14] == Value::i64(0));
    CHECK(s.regs[15] == Value::i64(0));
  }
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t imm = rng.next();
    ExecState s = exec_block(Block(expand(LoadImm64(r3, imm))), ExecState::zeroed());
    CHECK(s.regs[3] == Value::i64(imm));
  }
}

TEST_CASE("reference copy semantics: forward, cell by cell, clobbers undef") {
  const std::uint32_t arena = 16;
  for (std::uint32_t size : {8u, 24u, 40u}) {
    std::uint32_t cells = size / 8;
    for (std::uint32_t sc = 0; sc + cells <= arena; ++sc) {
      for (std::uint32_t dc = 0; dc + cells <= arena; ++dc) {
        MemCopy mc(r1, r2, size, 8);
        ExecState s = arena_state(arena);
        s.regs[1] = Value::i64(0x10000 + 8ull * dc);
        s.regs[2] = Value::i64(0x10000 + 8ull * sc);

        ExecState oracle = s;
        for (std::uint32_t k = 0; k < cells; ++k)
          oracle.mem.store(0x10000 + 8ull * (dc + k),
                           oracle.mem.load(0x10000 + 8ull * (sc + k)));

        ExecState ref = s;
        exec_pseudo(PseudoInstr(mc), ref);
        REQUIRE_FALSE(ref.trapped());
        CHECK(ref.mem.cells() == oracle.mem.cells());
        CHECK_FALSE(ref.regs[15].defined());  // declared clobber went undef

        ExecState got = exec_block(Block(expand(PseudoInstr(mc))), s);
        REQUIRE_FALSE(got.trapped());
        CHECK(state_refines(got, ref));
        CHECK(got.mem.cells() == oracle.mem.cells());
      }
    }
  }
}

TEST_CASE("copy onto itself is the identity on memory") {
  ExecState s = arena_state(8);
  s.regs[1] = Value::i64(0x10000);
  ExecState out = s;
  exec_pseudo(PseudoInstr(MemCopy(r1, r1, 64, 8)), out);
  REQUIRE_FALSE(out.trapped());
  CHECK(out.mem.cells() == s.mem.cells());
}

TEST_CASE("the loop variant works where straight offsets cannot reach") {
  MemCopy mc(r1, r2, 4096, 8);
  ExecState s;
  s.mem.add_valid_range(0x10000, 0x10000 + 8 * 1200);
  for (unsigned r = 0; r < kNumRegs; ++r) s.regs[r] = Value::i64(3 * r);
  Rng rng(13);
  for (std::uint32_t k = 0; k < 1200; ++k)
    s.mem.store(0x10000 + 8ull * k, Value::i64(rng.next()));
  s.regs[2] = Value::i64(0x10000);
  s.regs[1] = Value::i64(0x10000 + 8ull * 600);

  ExecState ref = s;
  exec_pseudo(PseudoInstr(mc), ref);
  ExecState got = exec_block(Block(expand(PseudoInstr(mc))), s);
  REQUIRE_FALSE(ref.trapped());
  REQUIRE_FALSE(got.trapped());
  CHECK(state_refines(got, ref));
  CHECK_FALSE(ref.regs[14].defined());
  CHECK_FALSE(ref.regs[15].defined());
}

TEST_CASE("a bad placement traps atomically, before any write") {
  ExecState s = arena_state(4);
  s.regs[2] = Value::i64(0x10000);
  s.regs[1] = Value::i64(0x10000 + 8 * 2);  // [dst, dst+4 cells) straddles the end

  ExecState out = s;
  exec_pseudo(PseudoInstr(MemCopy(r1, r2, 32, 8)), out);
  REQUIRE(out.trapped());
  CHECK(out.trap == TrapCause::InvalidAddress);
  CHECK(out.mem.cells() == s.mem.cells());  // nothing was written

  SUBCASE("undef base traps with the undef cause") {
    ExecState u = s;
    u.regs[2] = Value::undef();
    exec_pseudo(PseudoInstr(MemCopy(r1, r2, 32, 8)), u);
    REQUIRE(u.trapped());
    CHECK(u.trap == TrapCause::UndefAddress);
  }
  SUBCASE("a trapped state is left alone") {
    ExecState t = s;
    t.trap = TrapCause::InvalidAddress;
    exec_pseudo(PseudoInstr(LoadImm64(r3, 9)), t);
    CHECK(t.regs[3] == s.regs[3]);
  }
}

TEST_CASE("expand_block replaces pseudos inline") {
  Block b({
      MovI{Reg(4), Imm16(2)},
      Pseudo{LoadImm64(r3, 7)},
      BinR{BinOp::Add, Reg(4), Reg(4), r3},
  });
  Block e = expand_block(b);
  REQUIRE(e.instrs.size() == 3);
  CHECK(e.instrs[0] == b.instrs[0]);
  CHECK(e.instrs[1] == Instruction{MovI{r3, Imm16(7)}});
  CHECK(e.instrs[2] == b.instrs[2]);
  CHECK(hset_eq(e.live_out, b.live_out));
}

TEST_CASE("validate_expansion accepts every built-in expansion") {
  ValidateOptions opts{64, 21};
  for (std::uint32_t size : {0u, 8u, 64u, 72u, 1024u, 4096u}) {
    for (Reg dst : {r1, r2}) {
      PseudoInstr p = MemCopy(dst, r2, size, 8);
      Verdict v = validate_expansion(p, expand(p), opts);
      INFO("size ", size, " dst r", dst.index());
      CHECK(v);
    }
  }
  for (std::uint64_t imm : {std::uint64_t{5}, std::uint64_t{1} << 40}) {
    PseudoInstr p = LoadImm64(r3, imm);
    CHECK(validate_expansion(p, expand(p), opts));
  }
}

TEST_CASE("seeded expander faults are rejected") {
  ValidateOptions opts{64, 22};

  SUBCASE("undeclared clobber of r13") {
    PseudoInstr p = LoadImm64(r3, 5);
    Verdict v = validate_expansion(p, expand_with_fault(p, ExpandFault::UndeclaredClobber), opts);
    REQUIRE_FALSE(v);
    CHECK(v.reason == RejectKind::RegisterMismatch);
    CHECK(v.reg == 13);
    CHECK(to_string(v) == "REJECTED RegisterMismatch(r13): undeclared register write");
  }
  SUBCASE("wrong-order pairs when dst aliases src") {
    PseudoInstr p = MemCopy(r1, r1, 16, 8);
    Verdict v = validate_expansion(p, expand_with_fault(p, ExpandFault::AliasWrongOrder), opts);
    REQUIRE_FALSE(v);
    CHECK(v.reason == RejectKind::ChecksumMismatch);
    // the same bug is invisible while dst and src differ
    PseudoInstr q = MemCopy(r1, r2, 16, 8);
    CHECK(validate_expansion(q, expand_with_fault(q, ExpandFault::AliasWrongOrder), opts));
  }
  SUBCASE("copy direction reversed") {
    PseudoInstr p = MemCopy(r1, r2, 64, 8);
    CHECK_FALSE(validate_expansion(p, expand_with_fault(p, ExpandFault::SwapSrcDst), opts));
  }
  SUBCASE("straight-line copy beyond the immediate range will not construct") {
    PseudoInstr p = MemCopy(r1, r2, 4096, 8);
    CHECK_THROWS_AS(expand_with_fault(p, ExpandFault::StraightEverywhere), ContractError);
    // ... and silently works — correctly — while offsets still fit
    PseudoInstr q = MemCopy(r1, r2, 1024, 8);
    CHECK(validate_expansion(q, expand_with_fault(q, ExpandFault::StraightEverywhere), opts));
  }
}

TEST_CASE("stray writes outside the declared effect are caught differentially") {
  PseudoInstr p = MemCopy(r1, r2, 16, 8);
  std::vector<Instruction> e = expand(p);
  e.push_back(Sd{Reg(0), Imm12(0), r2});  // scribble over the source region
  CHECK_FALSE(validate_expansion(p, e, {64, 23}));
}

TEST_CASE("an expansion that can trap where the pseudo cannot is rejected") {
  PseudoInstr p = LoadImm64(r3, 5);
  std::vector<Instruction> e = {MovI{r3, Imm16(5)}, Ld{r3, Imm12(0), r3}};
  Verdict v = validate_expansion(p, e, {64, 24});
  REQUIRE_FALSE(v);
  CHECK(v.reason == RejectKind::TrapSetMismatch);
}
