#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "tcbforge/ops.hpp"

namespace tcbforge {

// Identifier of an interned term. Within one InternContext, ids are dense,
// assigned in creation order, and two live terms carry the same id iff they
// are structurally equal (ignoring the id itself). Equality of ids is the
// constant-time equality test everything downstream relies on.
struct NodeId {
  std::uint32_t v = 0;
  friend constexpr bool operator==(NodeId, NodeId) = default;
  friend constexpr bool operator<(NodeId a, NodeId b) { return a.v < b.v; }
};

enum class TermKind : std::uint8_t {
  InitReg,          // payload: register index
  ConstI64,         // payload: constant bits
  UnOp,             // payload: UnOp
  BinOp,            // payload: BinOp
  TernOp,           // payload: TernOp
  Load,             // children: memory, address
  DismissibleLoad,  // children: memory, address
  Store,            // children: memory, address, value
  InitMem,
  Select,           // children: condition, then, else
};

// Constructor symbol: kind plus an immediate payload (register index,
// constant bits, or operator code). Children are carried separately.
struct TermTag {
  TermKind kind;
  std::uint64_t payload = 0;
  friend constexpr bool operator==(const TermTag&, const TermTag&) = default;
};

namespace tags {
constexpr TermTag init_reg(unsigned r) { return {TermKind::InitReg, r}; }
constexpr TermTag const_i64(std::uint64_t bits) { return {TermKind::ConstI64, bits}; }
constexpr TermTag un_op(UnOp op) { return {TermKind::UnOp, static_cast<std::uint64_t>(op)}; }
constexpr TermTag bin_op(BinOp op) { return {TermKind::BinOp, static_cast<std::uint64_t>(op)}; }
constexpr TermTag tern_op(TernOp op) { return {TermKind::TernOp, static_cast<std::uint64_t>(op)}; }
constexpr TermTag load_tag() { return {TermKind::Load, 0}; }
constexpr TermTag dismissible_load_tag() { return {TermKind::DismissibleLoad, 0}; }
constexpr TermTag store_tag() { return {TermKind::Store, 0}; }
constexpr TermTag init_mem() { return {TermKind::InitMem, 0}; }
constexpr TermTag select_tag() { return {TermKind::Select, 0}; }
}  // namespace tags

constexpr unsigned arity_of(TermKind k) {
  switch (k) {
    case TermKind::InitReg:
    case TermKind::ConstI64:
    case TermKind::InitMem:
      return 0;
    case TermKind::UnOp:
      return 1;
    case TermKind::BinOp:
    case TermKind::Load:
    case TermKind::DismissibleLoad:
      return 2;
    case TermKind::TernOp:
    case TermKind::Store:
    case TermKind::Select:
      return 3;
  }
  return 0;
}

struct Term {
  NodeId id;
  TermTag tag;
  std::array<NodeId, 3> child{};  // first `arity` entries are valid
  std::uint8_t arity = 0;

  std::span<const NodeId> children() const { return {child.data(), arity}; }
};

// Maximal-sharing term store. Every construction goes through intern(), which
// either returns the id of the already-present structural instance or appends
// a fresh node. Nothing is ever removed, so ids stay valid for the lifetime
// of the context and canonicity cannot be invalidated by reclamation.
//
// Not shareable across threads; one context per pipeline run / fuzz worker.
class InternContext {
 public:
  // Returns the canonical id for (tag, children). Children must already be
  // interned here and match the tag's arity.
  NodeId intern(TermTag tag, std::span<const NodeId> children);
  NodeId intern(TermTag tag, std::initializer_list<NodeId> children) {
    return intern(tag, std::span<const NodeId>(children.begin(), children.size()));
  }

  const Term& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool valid(NodeId id) const { return id.v < nodes_.size(); }

  // Reference equality oracle: compares the trees unfolded from a and b,
  // ignoring ids. Deliberately does not consult the intern table, so it can
  // be used to cross-check canonicity. Iterative; memoised on node pairs so
  // shared substructure is not re-traversed.
  bool structural_eq(NodeId a, NodeId b) const;

  // Shallow re-check of an untrusted constructor's result: candidate must
  // have the requested tag and id-equal children. O(arity); no traversal.
  // Returns false on any mismatch (never throws for mismatches).
  bool verify_intern(TermTag tag, std::span<const NodeId> children,
                     NodeId candidate) const;
  bool verify_intern(TermTag tag, std::initializer_list<NodeId> children,
                     NodeId candidate) const {
    return verify_intern(tag, std::span<const NodeId>(children.begin(), children.size()),
                         candidate);
  }

  // Debug dump, one node per line: `<id> <tag> <child-ids...>`.
  void dump(std::ostream& os) const;

 private:
  struct Key {
    std::uint8_t kind;
    std::uint8_t arity;
    std::uint64_t payload;
    std::array<std::uint32_t, 3> child;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  static Key make_key(TermTag tag, std::span<const NodeId> children);

  std::vector<Term> nodes_;
  std::unordered_map<Key, std::uint32_t, KeyHash> table_;
};

}  // namespace tcbforge
