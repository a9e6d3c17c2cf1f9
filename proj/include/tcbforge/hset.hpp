#pragma once

#include <cstdint>
#include <initializer_list>
#include <unordered_map>
#include <vector>

namespace tcbforge {

struct SetId {
  std::uint32_t v = 0;
  friend constexpr bool operator==(SetId, SetId) = default;
};

// Hash-consed sets of small non-negative integers (register indices), stored
// as fixed-depth binary tries with interned branch nodes. Canonical form
// (no empty subtries) makes set equality an id comparison, and lets union
// short-circuit whole subtries whenever both arguments share a node.
//
// Element range is capped at kMaxElement so the trie depth is a constant and
// exhaustive oracles stay cheap. Nodes are never reclaimed.
class SetContext {
 public:
  static constexpr std::uint32_t kMaxElement = 1023;

  SetId empty() const { return kEmpty; }
  SetId add(SetId s, std::uint32_t elem);
  bool mem(SetId s, std::uint32_t elem) const;

  // Union with the identity shortcut applied at every trie level: whenever
  // the two arguments are the same node, that node is the union. Each hit
  // bumps shortcut_hits().
  SetId set_union(SetId a, SetId b);
  // Same result, shortcut disabled; exists so tests can confirm the shortcut
  // never changes the constructed set.
  SetId set_union_no_shortcut(SetId a, SetId b);
  SetId set_inter(SetId a, SetId b);

  std::vector<std::uint32_t> elements(SetId s) const;
  std::uint64_t shortcut_hits() const { return shortcut_hits_; }
  std::size_t node_count() const { return 2 + branches_.size(); }
  bool valid(SetId s) const { return s.v < node_count(); }

 private:
  static constexpr SetId kEmpty{0};
  static constexpr SetId kLeaf{1};
  static constexpr int kDepth = 10;  // 2^10 = kMaxElement + 1

  struct Pair {
    SetId l, r;
  };

  SetId branch(SetId l, SetId r);
  SetId left(SetId s) const { return s.v < 2 ? kEmpty : branches_[s.v - 2].l; }
  SetId right(SetId s) const { return s.v < 2 ? kEmpty : branches_[s.v - 2].r; }

  SetId add_rec(SetId s, std::uint32_t elem, int depth);
  SetId union_rec(SetId a, SetId b, bool shortcut);
  SetId inter_rec(SetId a, SetId b);
  void elements_rec(SetId s, int depth, std::uint32_t prefix,
                    std::vector<std::uint32_t>& out) const;

  std::vector<Pair> branches_;  // node id = index + 2
  std::unordered_map<std::uint64_t, std::uint32_t> table_;
  std::uint64_t shortcut_hits_ = 0;
};

// Value handle: a set root plus the context it lives in. All binary
// operations require both operands to come from the same context.
class HSet {
 public:
  explicit HSet(SetContext& ctx) : ctx_(&ctx), root_(ctx.empty()) {}
  HSet(SetContext& ctx, SetId root) : ctx_(&ctx), root_(root) {}
  static HSet of(SetContext& ctx, std::initializer_list<std::uint32_t> elems);

  HSet add(std::uint32_t elem) const { return {*ctx_, ctx_->add(root_, elem)}; }
  bool mem(std::uint32_t elem) const { return ctx_->mem(root_, elem); }
  bool is_empty() const { return root_ == ctx_->empty(); }
  std::vector<std::uint32_t> elements() const { return ctx_->elements(root_); }

  SetId root() const { return root_; }
  SetContext& context() const { return *ctx_; }

 private:
  SetContext* ctx_;
  SetId root_;
};

HSet hset_union(const HSet& a, const HSet& b);
HSet hset_inter(const HSet& a, const HSet& b);
HSet hset_add(const HSet& s, std::uint32_t elem);
bool hset_mem(const HSet& s, std::uint32_t elem);
// Identity test: id comparison, O(1). Both sets must share a context.
bool hset_eq(const HSet& a, const HSet& b);

// Per-thread context backing convenience constructors (block live-out sets,
// clobber specs). Fuzz workers on separate threads each get their own.
SetContext& default_set_context();
HSet all_registers();
HSet regs_of(std::initializer_list<std::uint32_t> elems);

}  // namespace tcbforge
