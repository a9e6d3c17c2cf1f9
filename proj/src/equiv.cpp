#include "tcbforge/equiv.hpp"

#include <algorithm>

namespace tcbforge {

std::string to_string(const Verdict& v) {
  if (v.equivalent) return "EQUIVALENT";
  std::string s = "REJECTED ";
  switch (v.reason) {
    case RejectKind::RegisterMismatch:
      s += "RegisterMismatch(r" + std::to_string(v.reg) + ")";
      break;
    case RejectKind::MemoryMismatch: s += "MemoryMismatch"; break;
    case RejectKind::TrapSetMismatch: s += "TrapSetMismatch"; break;
    case RejectKind::StructuralMismatch: s += "StructuralMismatch"; break;
    case RejectKind::ChecksumMismatch: s += "ChecksumMismatch"; break;
    case RejectKind::PrintError: s += "PrintError"; break;
    case RejectKind::ParseError: s += "ParseError"; break;
  }
  if (!v.detail.empty()) s += ": " + v.detail;
  return s;
}

namespace {

std::vector<NodeId> sorted_unique(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end(),
                        [](NodeId a, NodeId b) { return a.v == b.v; }),
            ids.end());
  return ids;
}

}  // namespace

Verdict equiv_check(InternContext& ctx, const Block& b1, const Block& b2) {
  if (!hset_eq(b1.live_out, b2.live_out))
    throw ContractError("equiv_check: blocks disagree on live_out");
  SymbolicState s1 = symb_exec(ctx, b1);
  SymbolicState s2 = symb_exec(ctx, b2);

  for (unsigned r : b1.live_out.elements()) {
    if (!(s1.reg_terms[r] == s2.reg_terms[r])) return Verdict::reject_reg(r);
  }
  if (!(s1.mem_term == s2.mem_term))
    return Verdict::reject(RejectKind::MemoryMismatch);

  // b2 may only trap where b1 does: its trap addresses must all appear in b1.
  std::vector<NodeId> t1 = sorted_unique(s1.trap_terms);
  std::vector<NodeId> t2 = sorted_unique(s2.trap_terms);
  if (!std::includes(t1.begin(), t1.end(), t2.begin(), t2.end()))
    return Verdict::reject(RejectKind::TrapSetMismatch);

  return Verdict::accept();
}

}  // namespace tcbforge
