#include <doctest.h>

#include "tcbforge/equiv.hpp"
#include "tcbforge/interp.hpp"
#include "tcbforge/rng.hpp"

using namespace tcbforge;

TEST_CASE("symbolic execution builds the documented term shapes") {
  InternContext ctx;
  Block b({MovI{Reg(1), Imm16(4)}, Sd{Reg(1), Imm12(0), Reg(2)}});
  SymbolicState st = symb_exec(ctx, b);

  NodeId c4 = ctx.intern(tags::const_i64(4), {});
  CHECK(st.reg_terms[1] == c4);

  NodeId r2 = ctx.intern(tags::init_reg(2), {});
  NodeId c0 = ctx.intern(tags::const_i64(0), {});
  NodeId addr = ctx.intern(tags::bin_op(BinOp::Add), {r2, c0});
  NodeId mem0 = ctx.intern(tags::init_mem(), {});
  CHECK(st.mem_term == ctx.intern(tags::store_tag(), {mem0, addr, c4}));

  REQUIRE(st.trap_terms.size() == 1);  // the store can trap; nothing else
  CHECK(st.trap_terms[0] == addr);

  CHECK(st.reg_terms[0] == ctx.intern(tags::init_reg(0), {}));  // untouched
}

TEST_CASE("addi and an explicit add build the same term") {
  InternContext ctx;
  Block via_imm({AddI{Reg(1), Reg(2), Imm12(5)}});
  Block via_reg({MovI{Reg(3), Imm16(5)}, BinR{BinOp::Add, Reg(1), Reg(2), Reg(3)}});
  SymbolicState a = symb_exec(ctx, via_imm);
  SymbolicState b = symb_exec(ctx, via_reg);
  CHECK(a.reg_terms[1] == b.reg_terms[1]);

  Block eq_a(via_imm.instrs, regs_of({1}));
  Block eq_b(via_reg.instrs, regs_of({1}));
  InternContext ctx2;
  CHECK(equiv_check(ctx2, eq_a, eq_b));
}

TEST_CASE("loads differ from dismissible loads symbolically") {
  InternContext ctx;
  SymbolicState ld = symb_exec(ctx, Block({Ld{Reg(1), Imm12(0), Reg(2)}}));
  SymbolicState sld = symb_exec(ctx, Block({Sld{Reg(1), Imm12(0), Reg(2)}}));
  CHECK_FALSE(ld.reg_terms[1] == sld.reg_terms[1]);
  CHECK(ld.trap_terms.size() == 1);
  CHECK(sld.trap_terms.empty());  // dismissible loads never trap
}

TEST_CASE("pseudo-instructions are rejected by symbolic execution") {
  InternContext ctx;
  Block b({Pseudo{LoadImm64(Reg(1), 5)}});
  CHECK_THROWS_AS(symb_exec(ctx, b), ContractError);
}

TEST_CASE("equiv_check accepts reorders of independent instructions") {
  InternContext ctx;
  Block b1({MovI{Reg(1), Imm16(3)}, MovI{Reg(2), Imm16(4)}});
  Block b2({MovI{Reg(2), Imm16(4)}, MovI{Reg(1), Imm16(3)}});
  Verdict v = equiv_check(ctx, b1, b2);
  CHECK(v);
  CHECK(to_string(v) == "EQUIVALENT");
}

TEST_CASE("equiv_check rejects a dependent swap with the lowest mismatching register") {
  InternContext ctx;
  Block b1({MovI{Reg(4), Imm16(7)}, BinR{BinOp::Add, Reg(5), Reg(4), Reg(4)}});
  Block b2({BinR{BinOp::Add, Reg(5), Reg(4), Reg(4)}, MovI{Reg(4), Imm16(7)}});
  Verdict v = equiv_check(ctx, b1, b2);
  REQUIRE_FALSE(v);
  CHECK(v.reason == RejectKind::RegisterMismatch);
  CHECK(v.reg == 5);
  CHECK(to_string(v).rfind("REJECTED RegisterMismatch(r5)", 0) == 0);
}

TEST_CASE("store reordering is rejected even when provably disjoint") {
  // Two stores to statically different offsets commute semantically, but the
  // checker compares store chains structurally: conservative, documented.
  InternContext ctx;
  Block b1({Sd{Reg(1), Imm12(0), Reg(2)}, Sd{Reg(3), Imm12(8), Reg(2)}});
  Block b2({Sd{Reg(3), Imm12(8), Reg(2)}, Sd{Reg(1), Imm12(0), Reg(2)}});
  Verdict v = equiv_check(ctx, b1, b2);
  REQUIRE_FALSE(v);
  CHECK(v.reason == RejectKind::MemoryMismatch);

  // ... and indeed both orders agree concretely.
  ExecState s;
  s.mem.add_valid_range(0x1000, 0x1100);
  s.regs[1] = Value::i64(10);
  s.regs[2] = Value::i64(0x1000);
  s.regs[3] = Value::i64(30);
  CHECK(checksum(exec_block(b1, s)) == checksum(exec_block(b2, s)));
}

TEST_CASE("fmadd operand swaps are rejected structurally despite commuting") {
  InternContext ctx;
  Block b1({Fmadd{Reg(1), Reg(2), Reg(3), Reg(4)}});
  Block b2({Fmadd{Reg(1), Reg(3), Reg(2), Reg(4)}});
  Verdict v = equiv_check(ctx, b1, b2);
  REQUIRE_FALSE(v);
  CHECK(v.reason == RejectKind::RegisterMismatch);
  CHECK(v.reg == 1);

  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    ExecState s;
    for (unsigned r = 0; r < kNumRegs; ++r) s.regs[r] = Value::i64(rng.next());
    CHECK(checksum(exec_block(b1, s)) == checksum(exec_block(b2, s)));
  }
}

TEST_CASE("dropping a trapping access is fine; adding one is not") {
  HSet none = regs_of({});
  Block with_load({Ld{Reg(1), Imm12(0), Reg(2)}}, none);
  Block without({}, none);

  InternContext ctx;
  CHECK(equiv_check(ctx, with_load, without));  // b2's trap set is a subset

  Verdict v = equiv_check(ctx, without, with_load);
  REQUIRE_FALSE(v);
  CHECK(v.reason == RejectKind::TrapSetMismatch);
}

TEST_CASE("trap sets compare as sets, not sequences") {
  HSet none = regs_of({});
  Block b1({Ld{Reg(1), Imm12(0), Reg(2)}, Ld{Reg(3), Imm12(8), Reg(4)}}, none);
  Block b2({Ld{Reg(3), Imm12(8), Reg(4)}, Ld{Reg(1), Imm12(0), Reg(2)}}, none);
  InternContext ctx;
  CHECK(equiv_check(ctx, b1, b2));
}

TEST_CASE("mismatched live_out is a contract violation, not a verdict") {
  InternContext ctx;
  Block b1({}, regs_of({1}));
  Block b2({}, regs_of({2}));
  CHECK_THROWS_AS(equiv_check(ctx, b1, b2), ContractError);
}

TEST_CASE("live_out scoping: differences in dead registers are invisible") {
  InternContext ctx;
  Block b1({MovI{Reg(1), Imm16(3)}, MovI{Reg(2), Imm16(8)}}, regs_of({1}));
  Block b2({MovI{Reg(1), Imm16(3)}, MovI{Reg(2), Imm16(9)}}, regs_of({1}));
  CHECK(equiv_check(ctx, b1, b2));

  Block b3(b2.instrs, regs_of({1, 2}));
  Block b4(b1.instrs, regs_of({1, 2}));
  Verdict v = equiv_check(ctx, b4, b3);
  REQUIRE_FALSE(v);
  CHECK(v.reg == 2);
}

TEST_CASE("no unsound acceptance on exhaustive two-instruction swaps") {
  std::vector<Instruction> pool = {
      MovI{Reg(1), Imm16(5)},
      MovI{Reg(2), Imm16(6)},
      AddI{Reg(1), Reg(1), Imm12(1)},
      BinR{BinOp::Add, Reg(3), Reg(1), Reg(2)},
      BinR{BinOp::Mul, Reg(1), Reg(3), Reg(3)},
      Fmadd{Reg(4), Reg(1), Reg(2), Reg(3)},
      Ld{Reg(5), Imm12(0), Reg(6)},
      Sld{Reg(5), Imm12(8), Reg(6)},
      Sd{Reg(1), Imm12(0), Reg(6)},
      Sd{Reg(2), Imm12(8), Reg(6)},
  };
  Rng rng(23);
  for (const Instruction& i1 : pool) {
    for (const Instruction& i2 : pool) {
      Block fwd({i1, i2});
      Block rev({i2, i1});
      InternContext ctx;
      if (!equiv_check(ctx, fwd, rev)) continue;
      for (int k = 0; k < 32; ++k) {
        ExecState s;
        s.mem.add_valid_range(0x2000, 0x2080);
        for (unsigned r = 0; r < kNumRegs; ++r)
          s.regs[r] = rng.chance(0.1) ? Value::undef() : Value::i64(rng.below(64));
        s.regs[6] = Value::i64(0x2000 + 8 * rng.below(4));
        CHECK(checksum(exec_block(fwd, s)) == checksum(exec_block(rev, s)));
      }
    }
  }
}

TEST_CASE("oracle_twice_consistency validates each run independently") {
  Block original({MovI{Reg(1), Imm16(3)}, MovI{Reg(2), Imm16(4)}});
  Block reordered({MovI{Reg(2), Imm16(4)}, MovI{Reg(1), Imm16(3)}});
  Block broken({MovI{Reg(1), Imm16(30)}, MovI{Reg(2), Imm16(4)}});

  CHECK(oracle_twice_consistency(original, [&] { return reordered; }));

  int call = 0;
  CHECK_FALSE(oracle_twice_consistency(
      original, [&] { return call++ == 0 ? reordered : broken; }));

  call = 0;
  CHECK_FALSE(oracle_twice_consistency(
      original, [&] { return call++ == 0 ? broken : reordered; }));
}

TEST_CASE("verdicts print their reason") {
  CHECK(to_string(Verdict::reject_reg(13, "undeclared register write")) ==
        "REJECTED RegisterMismatch(r13): undeclared register write");
  CHECK(to_string(Verdict::reject(RejectKind::TrapSetMismatch)) ==
        "REJECTED TrapSetMismatch");
  CHECK(to_string(Verdict::accept()) == "EQUIVALENT");
}
