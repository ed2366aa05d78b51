#include "wmcvar/sdd.hpp"

#include "wmcvar/error.hpp"

#include <algorithm>
#include <numeric>

namespace wmcvar {

SddManager::SddManager(std::shared_ptr<const Vtree> vt, std::size_t node_limit)
    : vt_(std::move(vt)), limit_(node_limit) {
  if (!vt_)
    throw StructureError("sdd manager needs a vtree");
  nodes_.push_back({Kind::False, kBottom, 0, 0, 0});
  nodes_.push_back({Kind::True, kBottom, 0, 0, 0});
  lit_nodes_.assign(2 * (vt_->num_vars() + 1), kFalse);
}

void SddManager::check(Sdd a) const {
  if (a >= nodes_.size())
    throw StructureError("unknown sdd node " + std::to_string(a));
}

Sdd SddManager::literal(Lit l) {
  const Var x = lit_var(l);
  if (l == 0 || x > vt_->num_vars())
    throw DomainError("literal " + std::to_string(l) + " is not in the vtree");
  Sdd &slot = lit_nodes_[2 * x + (l < 0)];
  if (slot == kFalse) {
    slot = static_cast<Sdd>(nodes_.size());
    nodes_.push_back({Kind::Literal, vt_->leaf_of(x), l, 0, 0});
  }
  return slot;
}

Sdd SddManager::negate(Sdd a) {
  check(a);
  if (a == kFalse)
    return kTrue;
  if (a == kTrue)
    return kFalse;
  if (nodes_[a].kind == Kind::Literal)
    return literal(-nodes_[a].lit);
  if (neg_cache_.size() <= a)
    neg_cache_.resize(nodes_.size(), kFalse);
  if (neg_cache_[a] != kFalse)
    return neg_cache_[a];
  auto src = elements(a);
  std::vector<Element> elems(src.begin(), src.end());
  for (auto &e : elems)
    e.sub = negate(e.sub);
  Sdd out = make_decision(nodes_[a].vnode, std::move(elems));
  if (neg_cache_.size() <= std::max(a, out))
    neg_cache_.resize(nodes_.size(), kFalse);
  neg_cache_[a] = out;
  neg_cache_[out] = a;
  return out;
}

std::vector<SddManager::Element> SddManager::expand(Sdd a, VnodeId v) {
  if (vt_->is_ancestor_or_self(vt_->left(v), nodes_[a].vnode))
    return {{a, kTrue}, {negate(a), kFalse}};
  return {{kTrue, a}};
}

Sdd SddManager::apply(Sdd a, Sdd b, SddOp op) {
  check(a);
  check(b);
  if (op == SddOp::And) {
    if (a == kFalse || b == kFalse)
      return kFalse;
    if (a == kTrue)
      return b;
    if (b == kTrue || a == b)
      return a;
  } else {
    if (a == kTrue || b == kTrue)
      return kTrue;
    if (a == kFalse)
      return b;
    if (b == kFalse || a == b)
      return a;
  }
  if (a > b)
    std::swap(a, b);
  auto &cache = op == SddOp::And ? and_cache_ : or_cache_;
  const std::uint64_t key = (std::uint64_t{a} << 32) | b;
  if (auto it = cache.find(key); it != cache.end())
    return it->second;

  const VnodeId va = nodes_[a].vnode, vb = nodes_[b].vnode;
  Sdd out;
  if (va == vb && vt_->is_leaf(va)) {
    // x and -x
    out = op == SddOp::And ? kFalse : kTrue;
  } else {
    auto own = [&](Sdd n) {
      auto s = elements(n);
      return std::vector<Element>(s.begin(), s.end());
    };
    if (va == vb)
      out = product(va, own(a), own(b), op);
    else if (vt_->is_ancestor_or_self(va, vb))
      out = product(va, own(a), expand(b, va), op);
    else if (vt_->is_ancestor_or_self(vb, va))
      out = product(vb, expand(a, vb), own(b), op);
    else {
      const VnodeId w = vt_->lca(va, vb);
      out = product(w, expand(a, w), expand(b, w), op);
    }
  }
  cache.emplace(key, out);
  return out;
}

Sdd SddManager::product(VnodeId v, const std::vector<Element> &a,
                        const std::vector<Element> &b, SddOp op) {
  std::vector<Element> out;
  for (const auto &x : a)
    for (const auto &y : b) {
      Sdd p = conjoin(x.prime, y.prime);
      if (p == kFalse)
        continue;
      out.push_back({p, apply(x.sub, y.sub, op)});
    }
  return make_decision(v, std::move(out));
}

Sdd SddManager::make_decision(VnodeId v, std::vector<Element> elems) {
  // compression: one element per distinct sub
  std::vector<Element> merged;
  for (const auto &e : elems) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Element &m) { return m.sub == e.sub; });
    if (it == merged.end())
      merged.push_back(e);
    else
      it->prime = disjoin(it->prime, e.prime);
  }
  if (merged.empty())
    return kFalse;
  // trimming
  if (merged.size() == 1)
    return merged[0].sub;
  if (merged.size() == 2) {
    if (merged[0].sub == kTrue && merged[1].sub == kFalse)
      return merged[0].prime;
    if (merged[1].sub == kTrue && merged[0].sub == kFalse)
      return merged[1].prime;
  }
  std::sort(merged.begin(), merged.end(),
            [](const Element &x, const Element &y) { return x.prime < y.prime; });
  std::vector<std::uint32_t> key;
  key.reserve(1 + 2 * merged.size());
  key.push_back(v);
  for (const auto &e : merged) {
    key.push_back(e.prime);
    key.push_back(e.sub);
  }
  if (auto it = unique_.find(key); it != unique_.end())
    return it->second;
  if (nodes_.size() >= limit_)
    throw CompileLimitError("sdd node limit of " + std::to_string(limit_) +
                            " exceeded");
  Sdd id = static_cast<Sdd>(nodes_.size());
  nodes_.push_back({Kind::Decision, v, 0,
                    static_cast<std::uint32_t>(elems_.size()),
                    static_cast<std::uint32_t>(merged.size())});
  elems_.insert(elems_.end(), merged.begin(), merged.end());
  unique_.emplace(std::move(key), id);
  return id;
}

Sdd SddManager::compile(const Cnf &cnf) {
  if (cnf.num_vars > vt_->num_vars())
    throw DomainError("cnf has more variables than the vtree");
  std::vector<std::size_t> order(cnf.clauses.size());
  std::vector<std::uint32_t> depth(cnf.clauses.size(), 0);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
    VnodeId d = kBottom;
    for (Lit l : cnf.clauses[i])
      d = vt_->lca(d, vt_->leaf_of(lit_var(l)));
    depth[i] = d == kBottom ? 0 : vt_->depth(d);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return depth[x] < depth[y]; });
  Sdd acc = kTrue;
  for (std::size_t i : order) {
    Sdd clause = kFalse;
    for (Lit l : cnf.clauses[i])
      clause = disjoin(clause, literal(l));
    acc = conjoin(acc, clause);
    if (acc == kFalse)
      break;
  }
  return acc;
}

std::vector<Sdd> SddManager::reachable(Sdd root) const {
  check(root);
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<Sdd> stack{root}, out;
  seen[root] = 1;
  while (!stack.empty()) {
    Sdd a = stack.back();
    stack.pop_back();
    out.push_back(a);
    for (const auto &e : elements(a))
      for (Sdd c : {e.prime, e.sub})
        if (!seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SddManager::decision_count(Sdd root) const {
  auto r = reachable(root);
  return static_cast<std::size_t>(std::count_if(
      r.begin(), r.end(), [&](Sdd a) { return is_decision(a); }));
}

std::size_t SddManager::element_count(Sdd root) const {
  std::size_t n = 0;
  for (Sdd a : reachable(root))
    n += elements(a).size();
  return n;
}

Circuit SddManager::to_circuit(Sdd root) const {
  CircuitBuilder b;
  std::vector<NodeId> map(nodes_.size());
  std::vector<NodeId> kids;
  for (Sdd a : reachable(root)) {
    const Node &n = nodes_[a];
    switch (n.kind) {
    case Kind::False:
      map[a] = b.false_node();
      break;
    case Kind::True:
      map[a] = b.true_node();
      break;
    case Kind::Literal:
      map[a] = b.literal(n.lit);
      break;
    case Kind::Decision:
      kids.clear();
      for (const auto &e : elements(a))
        kids.push_back(b.and_node({map[e.prime], map[e.sub]}));
      map[a] = b.or_node(kids, n.vnode);
      break;
    }
  }
  return b.build(map[root], vt_, vt_->num_vars());
}

Circuit compile_cnf(const Cnf &cnf, std::shared_ptr<const Vtree> vt,
                    std::size_t node_limit) {
  SddManager m(std::move(vt), node_limit);
  return m.to_circuit(m.compile(cnf));
}

} // namespace wmcvar
