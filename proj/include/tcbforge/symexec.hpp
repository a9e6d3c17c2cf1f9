#pragma once

#include <array>
#include <vector>

#include "tcbforge/hashcons.hpp"
#include "tcbforge/isa.hpp"

namespace tcbforge {

// Final state of a block as hash-consed terms over the initial state.
// trap_terms collects the address term of every access that can trap; the
// block traps on a given initial state iff one of them evaluates to Undef or
// to an invalid address.
struct SymbolicState {
  std::array<NodeId, kNumRegs> reg_terms{};
  NodeId mem_term{};
  std::vector<NodeId> trap_terms;
};

// Executes the block over terms. Deliberately performs no simplification:
// equivalence below is purely structural, so both sides must build their
// terms the same way. Pseudo-instructions are rejected (expand first).
SymbolicState symb_exec(InternContext& ctx, const Block& b);

}  // namespace tcbforge
