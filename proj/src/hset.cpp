#include "tcbforge/hset.hpp"

#include <stdexcept>

#include "tcbforge/errors.hpp"

namespace tcbforge {

namespace {

void check_elem(std::uint32_t elem) {
  if (elem > SetContext::kMaxElement)
    throw ContractError("hset: element out of supported range (0..=1023)");
}

}  // namespace

SetId SetContext::branch(SetId l, SetId r) {
  if (l == kEmpty && r == kEmpty) return kEmpty;  // canonical: no empty subtries
  std::uint64_t key = (static_cast<std::uint64_t>(l.v) << 32) | r.v;
  if (auto it = table_.find(key); it != table_.end()) return SetId{it->second};
  SetId id{static_cast<std::uint32_t>(node_count())};
  branches_.push_back({l, r});
  table_.emplace(key, id.v);
  return id;
}

SetId SetContext::add(SetId s, std::uint32_t elem) {
  check_elem(elem);
  if (!valid(s)) throw ContractError("hset: root id not in this context");
  return add_rec(s, elem, kDepth);
}

SetId SetContext::add_rec(SetId s, std::uint32_t elem, int depth) {
  if (depth == 0) return kLeaf;
  bool hi = (elem >> (depth - 1)) & 1u;
  SetId l = left(s), r = right(s);
  if (hi) return branch(l, add_rec(r, elem, depth - 1));
  return branch(add_rec(l, elem, depth - 1), r);
}

bool SetContext::mem(SetId s, std::uint32_t elem) const {
  check_elem(elem);
  if (!valid(s)) throw ContractError("hset: root id not in this context");
  for (int depth = kDepth; depth > 0; --depth) {
    if (s == kEmpty) return false;
    s = ((elem >> (depth - 1)) & 1u) ? right(s) : left(s);
  }
  return s == kLeaf;
}

SetId SetContext::set_union(SetId a, SetId b) {
  if (!valid(a) || !valid(b)) throw ContractError("hset: root id not in this context");
  return union_rec(a, b, /*shortcut=*/true);
}

SetId SetContext::set_union_no_shortcut(SetId a, SetId b) {
  if (!valid(a) || !valid(b)) throw ContractError("hset: root id not in this context");
  return union_rec(a, b, /*shortcut=*/false);
}

SetId SetContext::union_rec(SetId a, SetId b, bool shortcut) {
  if (shortcut && a == b) {
    ++shortcut_hits_;
    return a;
  }
  if (a == kEmpty) return b;
  if (b == kEmpty) return a;
  if (a == kLeaf || b == kLeaf) return kLeaf;  // only meets leaves at depth 0
  return branch(union_rec(left(a), left(b), shortcut),
                union_rec(right(a), right(b), shortcut));
}

SetId SetContext::set_inter(SetId a, SetId b) {
  if (!valid(a) || !valid(b)) throw ContractError("hset: root id not in this context");
  return inter_rec(a, b);
}

SetId SetContext::inter_rec(SetId a, SetId b) {
  if (a == b) return a;
  if (a == kEmpty || b == kEmpty) return kEmpty;
  if (a == kLeaf || b == kLeaf) return kLeaf;
  return branch(inter_rec(left(a), left(b)), inter_rec(right(a), right(b)));
}

std::vector<std::uint32_t> SetContext::elements(SetId s) const {
  if (!valid(s)) throw ContractError("hset: root id not in this context");
  std::vector<std::uint32_t> out;
  elements_rec(s, kDepth, 0, out);
  return out;
}

void SetContext::elements_rec(SetId s, int depth, std::uint32_t prefix,
                              std::vector<std::uint32_t>& out) const {
  if (s == kEmpty) return;
  if (depth == 0) {
    out.push_back(prefix);
    return;
  }
  elements_rec(left(s), depth - 1, prefix << 1, out);
  elements_rec(right(s), depth - 1, (prefix << 1) | 1u, out);
}

HSet HSet::of(SetContext& ctx, std::initializer_list<std::uint32_t> elems) {
  HSet s(ctx);
  for (std::uint32_t e : elems) s = s.add(e);
  return s;
}

namespace {

SetContext& same_context(const HSet& a, const HSet& b) {
  if (&a.context() != &b.context())
    throw ContractError("hset: operands from different set contexts");
  return a.context();
}

}  // namespace

HSet hset_union(const HSet& a, const HSet& b) {
  SetContext& ctx = same_context(a, b);
  return {ctx, ctx.set_union(a.root(), b.root())};
}

HSet hset_inter(const HSet& a, const HSet& b) {
  SetContext& ctx = same_context(a, b);
  return {ctx, ctx.set_inter(a.root(), b.root())};
}

HSet hset_add(const HSet& s, std::uint32_t elem) { return s.add(elem); }

bool hset_mem(const HSet& s, std::uint32_t elem) { return s.mem(elem); }

bool hset_eq(const HSet& a, const HSet& b) {
  same_context(a, b);
  return a.root() == b.root();
}

SetContext& default_set_context() {
  thread_local SetContext ctx;
  return ctx;
}

HSet all_registers() {
  HSet s(default_set_context());
  for (std::uint32_t r = 0; r < 16; ++r) s = s.add(r);
  return s;
}

HSet regs_of(std::initializer_list<std::uint32_t> elems) {
  return HSet::of(default_set_context(), elems);
}

}  // namespace tcbforge
