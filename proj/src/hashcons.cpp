#include "tcbforge/hashcons.hpp"

#include <ostream>
#include <string>
#include <unordered_set>

#include "tcbforge/errors.hpp"
#include "tcbforge/rng.hpp"

namespace tcbforge {

const char* name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "add";
    case BinOp::Sub: return "sub";
    case BinOp::Mul: return "mul";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Xor: return "xor";
    case BinOp::Nand: return "nand";
    case BinOp::Sll: return "sll";
    case BinOp::Srl: return "srl";
  }
  return "?";
}

const char* name(UnOp op) {
  switch (op) {
    case UnOp::Not: return "not";
    case UnOp::Neg: return "neg";
  }
  return "?";
}

const char* name(TernOp op) {
  switch (op) {
    case TernOp::Madd: return "madd";
  }
  return "?";
}

std::size_t InternContext::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = mix64(k.kind, k.payload);
  for (unsigned i = 0; i < k.arity; ++i) h = mix64(h, k.child[i]);
  return static_cast<std::size_t>(h);
}

InternContext::Key InternContext::make_key(TermTag tag,
                                           std::span<const NodeId> children) {
  Key k{static_cast<std::uint8_t>(tag.kind),
        static_cast<std::uint8_t>(children.size()),
        tag.payload,
        {0, 0, 0}};
  for (std::size_t i = 0; i < children.size(); ++i) k.child[i] = children[i].v;
  return k;
}

NodeId InternContext::intern(TermTag tag, std::span<const NodeId> children) {
  if (children.size() != arity_of(tag.kind))
    throw ContractError("intern: arity mismatch for tag");
  for (NodeId c : children)
    if (!valid(c)) throw ContractError("intern: child id not in this context");

  Key key = make_key(tag, children);
  if (auto it = table_.find(key); it != table_.end()) return NodeId{it->second};

  Term t;
  t.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
  t.tag = tag;
  t.arity = static_cast<std::uint8_t>(children.size());
  for (std::size_t i = 0; i < children.size(); ++i) t.child[i] = children[i];
  nodes_.push_back(t);
  table_.emplace(key, t.id.v);
  return t.id;
}

const Term& InternContext::node(NodeId id) const {
  if (!valid(id)) throw ContractError("node: id not in this context");
  return nodes_[id.v];
}

bool InternContext::structural_eq(NodeId a, NodeId b) const {
  if (!valid(a) || !valid(b)) throw ContractError("structural_eq: invalid id");

  // Unfolded trees are equal iff every reachable corresponding node pair has
  // matching tag and arity. A visited set over id pairs keeps this linear in
  // the number of distinct pairs even when the trees are exponentially large.
  std::unordered_set<std::uint64_t> visited;
  std::vector<std::pair<NodeId, NodeId>> work{{a, b}};
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    if (x == y) continue;  // same node unfolds to the same tree
    std::uint64_t pk = (static_cast<std::uint64_t>(x.v) << 32) | y.v;
    if (!visited.insert(pk).second) continue;
    const Term& tx = nodes_[x.v];
    const Term& ty = nodes_[y.v];
    if (tx.tag != ty.tag || tx.arity != ty.arity) return false;
    for (unsigned i = 0; i < tx.arity; ++i)
      work.emplace_back(tx.child[i], ty.child[i]);
  }
  return true;
}

bool InternContext::verify_intern(TermTag tag, std::span<const NodeId> children,
                                  NodeId candidate) const {
  if (!valid(candidate)) throw ContractError("verify_intern: invalid candidate");
  const Term& t = nodes_[candidate.v];
  if (t.tag != tag) return false;
  if (t.arity != children.size()) return false;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (!(t.child[i] == children[i])) return false;
  return true;
}

namespace {

std::string tag_text(const TermTag& tag) {
  switch (tag.kind) {
    case TermKind::InitReg:
      return "initreg(r" + std::to_string(tag.payload) + ")";
    case TermKind::ConstI64:
      return "const(" + std::to_string(static_cast<std::int64_t>(tag.payload)) + ")";
    case TermKind::UnOp:
      return std::string("un(") + name(static_cast<UnOp>(tag.payload)) + ")";
    case TermKind::BinOp:
      return std::string("bin(") + name(static_cast<BinOp>(tag.payload)) + ")";
    case TermKind::TernOp:
      return std::string("tern(") + name(static_cast<TernOp>(tag.payload)) + ")";
    case TermKind::Load: return "load";
    case TermKind::DismissibleLoad: return "sload";
    case TermKind::Store: return "store";
    case TermKind::InitMem: return "initmem";
    case TermKind::Select: return "select";
  }
  return "?";
}

}  // namespace

void InternContext::dump(std::ostream& os) const {
  for (const Term& t : nodes_) {
    os << t.id.v << ' ' << tag_text(t.tag);
    for (NodeId c : t.children()) os << ' ' << c.v;
    os << '\n';
  }
}

}  // namespace tcbforge
