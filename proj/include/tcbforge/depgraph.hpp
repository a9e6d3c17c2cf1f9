#pragma once

#include <cstdint>
#include <vector>

#include "tcbforge/isa.hpp"

namespace tcbforge {

enum class DepKind : std::uint8_t { RAW, WAR, WAW, MEM };

const char* name(DepKind k);

struct DepEdge {
  std::size_t from, to;  // instruction indices, from < to
  DepKind kind;
  friend bool operator==(const DepEdge&, const DepEdge&) = default;
};

struct DepGraph {
  std::size_t node_count = 0;
  std::vector<DepEdge> edges;
  std::vector<std::vector<std::uint32_t>> succ_edges;  // edge indices keyed by from
  std::vector<std::vector<std::uint32_t>> pred_edges;  // edge indices keyed by to
};

// Register dependences (RAW, WAR, WAW) plus ordering edges between memory
// accesses where at least one side is a store; loads are free to move past
// each other. Edges go through the last writer / accesses since it, so the
// graph is sparse but closes transitively over the full pairwise relation.
// Rejects pseudo-instructions: expand first.
DepGraph build_depgraph(const Block& b);

}  // namespace tcbforge
