#include "tcbforge/depgraph.hpp"

#include <optional>

namespace tcbforge {

const char* name(DepKind k) {
  switch (k) {
    case DepKind::RAW: return "RAW";
    case DepKind::WAR: return "WAR";
    case DepKind::WAW: return "WAW";
    case DepKind::MEM: return "MEM";
  }
  return "?";
}

DepGraph build_depgraph(const Block& b) {
  const std::size_t n = b.instrs.size();
  DepGraph g;
  g.node_count = n;
  g.succ_edges.resize(n);
  g.pred_edges.resize(n);

  auto add_edge = [&g](std::size_t from, std::size_t to, DepKind kind) {
    if (from == to) return;
    DepEdge e{from, to, kind};
    for (std::uint32_t i : g.succ_edges[from])
      if (g.edges[i] == e) return;
    auto idx = static_cast<std::uint32_t>(g.edges.size());
    g.edges.push_back(e);
    g.succ_edges[from].push_back(idx);
    g.pred_edges[to].push_back(idx);
  };

  std::array<std::optional<std::size_t>, kNumRegs> last_def;
  std::array<std::vector<std::size_t>, kNumRegs> uses_since_def;
  std::optional<std::size_t> last_store;
  std::vector<std::size_t> loads_since_store;

  for (std::size_t j = 0; j < n; ++j) {
    const Instruction& ins = b.instrs[j];
    if (is_pseudo(ins))
      throw ContractError("build_depgraph: pseudo-instructions must be expanded first");

    for (Reg r : use_regs(ins)) {
      if (last_def[r.index()]) add_edge(*last_def[r.index()], j, DepKind::RAW);
    }
    if (auto rd = def_reg(ins)) {
      unsigned d = rd->index();
      for (std::size_t u : uses_since_def[d]) add_edge(u, j, DepKind::WAR);
      if (last_def[d]) add_edge(*last_def[d], j, DepKind::WAW);
    }

    if (is_store(ins)) {
      if (last_store) add_edge(*last_store, j, DepKind::MEM);
      for (std::size_t l : loads_since_store) add_edge(l, j, DepKind::MEM);
      last_store = j;
      loads_since_store.clear();
    } else if (is_load(ins)) {
      if (last_store) add_edge(*last_store, j, DepKind::MEM);
      loads_since_store.push_back(j);
    }

    // Update register bookkeeping after edges are drawn, so an instruction
    // that reads and writes the same register depends on the old writer.
    for (Reg r : use_regs(ins)) uses_since_def[r.index()].push_back(j);
    if (auto rd = def_reg(ins)) {
      last_def[rd->index()] = j;
      uses_since_def[rd->index()].clear();
    }
  }
  return g;
}

}  // namespace tcbforge
