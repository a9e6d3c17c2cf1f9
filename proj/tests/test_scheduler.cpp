#include <doctest.h>

#include <algorithm>
#include <set>

#include "tcbforge/equiv.hpp"
#include "tcbforge/fuzz.hpp"
#include "tcbforge/rng.hpp"
#include "tcbforge/schedule.hpp"

using namespace tcbforge;

namespace {

MachineDesc uniform_machine(unsigned slots, unsigned latency) {
  MachineDesc m;
  m.slots = slots;
  for (const char* mn : all_mnemonics()) {
    m.latency[mn] = latency;
    m.unit[mn] = "ALU";
  }
  return m;
}

MachineDesc single_issue_machine() {
  MachineDesc m = default_machine();
  m.slots = 1;
  return m;
}

bool reaches(const DepGraph& g, std::size_t from, std::size_t to) {
  std::vector<std::size_t> work{from};
  std::vector<bool> seen(g.node_count);
  while (!work.empty()) {
    std::size_t i = work.back();
    work.pop_back();
    if (i == to) return true;
    if (seen[i]) continue;
    seen[i] = true;
    for (std::uint32_t e : g.succ_edges[i]) work.push_back(g.edges[e].to);
  }
  return false;
}

bool conflict(const Instruction& a, const Instruction& b) {
  auto defs = [](const Instruction& i) { return def_reg(i); };
  auto uses = [](const Instruction& i) { return use_regs(i); };
  if (auto d = defs(a)) {
    for (Reg u : uses(b))
      if (u == *d) return true;
    if (auto d2 = defs(b); d2 && *d2 == *d) return true;
  }
  if (auto d = defs(b))
    for (Reg u : uses(a))
      if (u == *d) return true;
  if (is_mem_op(a) && is_mem_op(b) && (is_store(a) || is_store(b))) return true;
  return false;
}

}  // namespace

TEST_CASE("dependence graph edge examples") {
  SUBCASE("one RAW edge") {
    DepGraph g = build_depgraph(
        Block({MovI{Reg(1), Imm16(4)}, BinR{BinOp::Add, Reg(2), Reg(1), Reg(1)}}));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == DepEdge{0, 1, DepKind::RAW});
  }
  SUBCASE("independent instructions have no edges") {
    DepGraph g = build_depgraph(
        Block({MovI{Reg(1), Imm16(4)}, MovI{Reg(2), Imm16(5)}}));
    CHECK(g.edges.empty());
  }
  SUBCASE("store then load is ordered") {
    DepGraph g = build_depgraph(Block(
        {Sd{Reg(1), Imm12(0), Reg(2)}, Ld{Reg(3), Imm12(8), Reg(4)}}));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == DepEdge{0, 1, DepKind::MEM});
  }
  SUBCASE("loads move past each other freely") {
    DepGraph g = build_depgraph(Block(
        {Ld{Reg(1), Imm12(0), Reg(2)}, Ld{Reg(3), Imm12(8), Reg(4)}}));
    CHECK(g.edges.empty());
  }
  SUBCASE("write-after-read") {
    DepGraph g = build_depgraph(Block(
        {BinR{BinOp::Add, Reg(1), Reg(2), Reg(3)}, MovI{Reg(2), Imm16(0)}}));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == DepEdge{0, 1, DepKind::WAR});
  }
  SUBCASE("write-after-write") {
    DepGraph g = build_depgraph(
        Block({MovI{Reg(1), Imm16(1)}, MovI{Reg(1), Imm16(2)}}));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == DepEdge{0, 1, DepKind::WAW});
  }
  SUBCASE("pseudos are rejected") {
    CHECK_THROWS_AS(build_depgraph(Block({Pseudo{LoadImm64(Reg(1), 5)}})),
                    ContractError);
  }
}

TEST_CASE("sparse edges close transitively over every pairwise conflict") {
  FuzzConfig cfg;
  cfg.pseudo_ratio = 0;
  cfg.block_len_max = 24;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto [b, s0] = gen_block(mix64(41, seed), cfg);
    DepGraph g = build_depgraph(b);
    for (std::size_t i = 0; i < b.instrs.size(); ++i)
      for (std::size_t j = i + 1; j < b.instrs.size(); ++j)
        if (conflict(b.instrs[i], b.instrs[j])) CHECK(reaches(g, i, j));
  }
}

TEST_CASE("a dependent chain schedules in order") {
  std::vector<Instruction> chain;
  for (int i = 0; i < 10; ++i) chain.push_back(AddI{Reg(1), Reg(1), Imm12(1)});
  Block b(chain);
  Fuel fuel;
  ScheduleResult r = list_schedule(b, default_machine(), 9, fuel);
  CHECK_FALSE(r.fuel_exhausted);
  CHECK(r.block.instrs == b.instrs);
}

TEST_CASE("scheduling hoists an independent load over a stall") {
  Block b({
      Ld{Reg(1), Imm12(0), Reg(10)},
      BinR{BinOp::Add, Reg(2), Reg(1), Reg(1)},
      Ld{Reg(5), Imm12(8), Reg(10)},
  });
  MachineDesc m = single_issue_machine();
  Fuel fuel;
  ScheduleResult r = list_schedule(b, m, 1, fuel);
  REQUIRE(r.block.instrs.size() == 3);
  CHECK(r.block.instrs[0] == b.instrs[0]);
  CHECK(r.block.instrs[1] == b.instrs[2]);  // the far load moved up
  CHECK(r.block.instrs[2] == b.instrs[1]);
  CHECK(pipeline_sim(r.block, m) < pipeline_sim(b, m));
  CHECK(pipeline_sim(b, m) == 5);
  CHECK(pipeline_sim(r.block, m) == 4);

  InternContext ctx;
  CHECK(equiv_check(ctx, b, r.block));
}

TEST_CASE("pipeline_sim goldens") {
  MachineDesc dm = default_machine();
  CHECK(pipeline_sim(Block{}, dm) == 0);
  CHECK(pipeline_sim(Block({BinR{BinOp::Add, Reg(1), Reg(2), Reg(3)}}), dm) == 1);

  MachineDesc lat2 = uniform_machine(2, 2);
  Block chain({
      BinR{BinOp::Add, Reg(1), Reg(1), Reg(1)},
      BinR{BinOp::Add, Reg(1), Reg(1), Reg(1)},
      BinR{BinOp::Add, Reg(1), Reg(1), Reg(1)},
  });
  CHECK(pipeline_sim(chain, lat2) == 5);  // issues at 0, 2, 4
}

TEST_CASE("functional units serialize within a cycle") {
  Block two_muls({
      BinR{BinOp::Mul, Reg(1), Reg(2), Reg(3)},
      BinR{BinOp::Mul, Reg(4), Reg(5), Reg(6)},
  });
  MachineDesc m = default_machine();
  CHECK(pipeline_sim(two_muls, m) == 2);  // one MUL pipe: issues at 0 and 1

  m.unit_count["MUL"] = 2;
  CHECK(pipeline_sim(two_muls, m) == 1);  // both issue in cycle 0

  Block mul_add({
      BinR{BinOp::Mul, Reg(1), Reg(2), Reg(3)},
      BinR{BinOp::Add, Reg(4), Reg(5), Reg(6)},
  });
  CHECK(pipeline_sim(mul_add, default_machine()) == 1);  // different units
}

TEST_CASE("schedules are checked permutations on random blocks") {
  FuzzConfig cfg;
  cfg.pseudo_ratio = 0;
  cfg.block_len_max = 40;
  MachineDesc m = default_machine();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [b, s0] = gen_block(mix64(97, seed), cfg);
    Fuel fuel;
    ScheduleResult r = list_schedule(b, m, seed, fuel);
    REQUIRE_FALSE(r.fuel_exhausted);
    REQUIRE(r.block.instrs.size() == b.instrs.size());

    // same multiset of instructions
    for (const Instruction& i : b.instrs) {
      auto count = [&](const Block& blk) {
        return std::count(blk.instrs.begin(), blk.instrs.end(), i);
      };
      CHECK(count(b) == count(r.block));
    }
    InternContext ctx;
    CHECK(equiv_check(ctx, b, r.block));
  }
}

TEST_CASE("distinct seeds explore distinct valid orders") {
  std::vector<Instruction> ins;
  for (unsigned r = 0; r < 10; ++r)
    ins.push_back(MovI{Reg(r), Imm16(static_cast<std::int16_t>(r))});
  Block b(ins);
  std::set<std::string> orders;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Fuel fuel;
    ScheduleResult r = list_schedule(b, default_machine(), seed, fuel);
    std::string key;
    for (const Instruction& i : r.block.instrs)
      key += static_cast<char>('0' + std::get<MovI>(i).rd.index());
    orders.insert(key);
    InternContext ctx;
    CHECK(equiv_check(ctx, b, r.block));
  }
  CHECK(orders.size() > 1);

  Fuel f1, f2;
  CHECK(list_schedule(b, default_machine(), 5, f1).block.instrs ==
        list_schedule(b, default_machine(), 5, f2).block.instrs);
}

TEST_CASE("fuel exhaustion returns the input unchanged, flagged") {
  Block b({MovI{Reg(1), Imm16(1)}, MovI{Reg(2), Imm16(2)}});
  Fuel fuel{0};
  ScheduleResult r = list_schedule(b, default_machine(), 1, fuel);
  CHECK(r.fuel_exhausted);
  CHECK(r.block.instrs == b.instrs);
}

TEST_CASE("fuel monotonicity on schedules") {
  FuzzConfig cfg;
  cfg.pseudo_ratio = 0;
  cfg.block_len_max = 16;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto [b, s0] = gen_block(mix64(101, seed), cfg);
    std::uint64_t f = 1;
    for (;; f *= 2) {
      Fuel fuel{f};
      ScheduleResult r = list_schedule(b, default_machine(), seed, fuel);
      if (r.fuel_exhausted) continue;
      Fuel more{f * 10};
      ScheduleResult r10 = list_schedule(b, default_machine(), seed, more);
      CHECK_FALSE(r10.fuel_exhausted);
      CHECK(r.block.instrs == r10.block.instrs);
      break;
    }
  }
}

TEST_CASE("bounded_iter spends one fuel per step") {
  struct Done {
    int v;
  };
  auto count_to_3 = [](int k) -> std::variant<int, Done> {
    if (k == 3) return Done{k};
    return k + 1;
  };
  Fuel enough{4};
  auto res = bounded_iter<int, Done>(enough, 0, count_to_3);
  REQUIRE(res.has_value());
  CHECK(res->v == 3);
  CHECK(enough.remaining == 0);

  Fuel short_one{3};
  CHECK_FALSE(bounded_iter<int, Done>(short_one, 0, count_to_3).has_value());

  Fuel f{2};
  CHECK(f.spend());
  CHECK(f.spend());
  CHECK_FALSE(f.spend());
}

TEST_CASE("acceptance never depends on the latency table") {
  FuzzConfig cfg;
  cfg.pseudo_ratio = 0;
  cfg.block_len_max = 24;
  Rng rng(55);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [b, s0] = gen_block(mix64(77, seed), cfg);
    for (int t = 0; t < 5; ++t) {
      MachineDesc m = default_machine();
      for (auto& [mn, lat] : m.latency) lat = 1 + rng.below(6);
      m.slots = 1 + rng.below(3);
      Fuel fuel;
      ScheduleResult r = list_schedule(b, m, seed, fuel);
      REQUIRE_FALSE(r.fuel_exhausted);
      InternContext ctx;
      CHECK(equiv_check(ctx, b, r.block));
    }
  }
}
