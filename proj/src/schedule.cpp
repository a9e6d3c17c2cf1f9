#include "tcbforge/schedule.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "tcbforge/rng.hpp"

namespace tcbforge {

namespace {

std::uint64_t edge_delay(const DepEdge& e, const Block& b, const MachineDesc& m) {
  // Only true dataflow waits out the producer's latency; ordering hazards
  // just need the next cycle.
  return e.kind == DepKind::RAW ? m.latency_of(b.instrs[e.from]) : 1;
}

struct SchedState {
  std::uint64_t cycle = 0;
  std::size_t emitted = 0;
  std::vector<std::size_t> order;
  std::vector<std::uint32_t> preds_left;
  std::vector<std::uint64_t> ready_at;  // valid once preds_left hits 0
  std::vector<bool> issued;
};

}  // namespace

ScheduleResult list_schedule(const Block& b, const MachineDesc& m,
                             std::uint64_t seed, Fuel& fuel) {
  const std::size_t n = b.instrs.size();
  DepGraph g = build_depgraph(b);

  // Critical-path priority, computed bottom-up (all edges point forward).
  std::vector<std::uint64_t> prio(n);
  for (std::size_t i = n; i-- > 0;) {
    prio[i] = m.latency_of(b.instrs[i]);
    for (std::uint32_t ei : g.succ_edges[i])
      prio[i] = std::max(prio[i], edge_delay(g.edges[ei], b, m) + prio[g.edges[ei].to]);
  }
  std::vector<std::uint64_t> tiebreak(n);
  for (std::size_t i = 0; i < n; ++i) tiebreak[i] = mix64(seed, i);

  SchedState st;
  st.order.reserve(n);
  st.preds_left.resize(n);
  st.ready_at.assign(n, 0);
  st.issued.assign(n, false);
  for (std::size_t i = 0; i < n; ++i)
    st.preds_left[i] = static_cast<std::uint32_t>(g.pred_edges[i].size());

  auto step = [&](SchedState s) -> std::variant<SchedState, std::vector<std::size_t>> {
    if (s.emitted == n) return std::move(s.order);

    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
      if (!s.issued[i] && s.preds_left[i] == 0 && s.ready_at[i] <= s.cycle)
        ready.push_back(i);
    std::sort(ready.begin(), ready.end(), [&](std::size_t a, std::size_t c) {
      if (prio[a] != prio[c]) return prio[a] > prio[c];
      return tiebreak[a] > tiebreak[c];
    });

    unsigned used_slots = 0;
    std::map<std::string, unsigned> unit_busy;
    for (std::size_t i : ready) {
      if (used_slots == m.slots) break;
      const std::string& u = m.unit_of(b.instrs[i]);
      if (unit_busy[u] >= m.count_of(u)) continue;
      ++unit_busy[u];
      ++used_slots;
      s.issued[i] = true;
      s.order.push_back(i);
      ++s.emitted;
      for (std::uint32_t ei : g.succ_edges[i]) {
        const DepEdge& e = g.edges[ei];
        s.ready_at[e.to] = std::max(s.ready_at[e.to], s.cycle + edge_delay(e, b, m));
        --s.preds_left[e.to];
      }
    }
    ++s.cycle;
    return s;
  };

  auto order = bounded_iter<SchedState, std::vector<std::size_t>>(fuel, std::move(st), step);
  if (!order) return {b, true};

  Block out({}, b.live_out);
  out.instrs.reserve(n);
  for (std::size_t i : *order) out.instrs.push_back(b.instrs[i]);
  return {std::move(out), false};
}

std::uint64_t pipeline_sim(const Block& b, const MachineDesc& m) {
  std::array<std::uint64_t, kNumRegs> reg_ready{};  // cycle the value exists from
  std::map<std::pair<std::string, std::uint64_t>, unsigned> unit_busy;
  std::map<std::uint64_t, unsigned> slots_used;
  std::uint64_t cycle = 0;
  bool any = false;
  std::uint64_t last_issue = 0;

  for (const Instruction& ins : b.instrs) {
    if (is_pseudo(ins))
      throw ContractError("pipeline_sim: pseudo-instructions must be expanded first");
    std::uint64_t t = cycle;
    for (Reg r : use_regs(ins)) t = std::max(t, reg_ready[r.index()]);
    const std::string& u = m.unit_of(ins);
    while (slots_used[t] >= m.slots || unit_busy[{u, t}] >= m.count_of(u)) ++t;
    ++slots_used[t];
    ++unit_busy[{u, t}];
    if (auto rd = def_reg(ins))
      reg_ready[rd->index()] = t + m.latency_of(ins);
    cycle = t;  // in-order issue: later instructions cannot issue earlier
    last_issue = t;
    any = true;
  }
  return any ? last_issue + 1 : 0;
}

}  // namespace tcbforge
