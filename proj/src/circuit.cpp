#include "wmcvar/circuit.hpp"

#include "wmcvar/error.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace wmcvar {

// ---------------------------------------------------------------------------
// Builder

namespace {

std::vector<char> reachable(const Circuit &c) {
  std::vector<char> r(c.size(), 0);
  r[c.root()] = 1;
  for (NodeId a = c.root() + 1; a-- > 0;)
    if (r[a])
      for (NodeId ch : c.children(a))
        r[ch] = 1;
  return r;
}

} // namespace

NodeId CircuitBuilder::push(NodeKind k, Lit l, std::span<const NodeId> children,
                            VnodeId decision) {
  auto id = static_cast<NodeId>(c_.kinds_.size());
  for (NodeId ch : children)
    if (ch >= id)
      throw StructureError("child id " + std::to_string(ch) +
                           " does not precede its parent");
  c_.kinds_.push_back(k);
  c_.lits_.push_back(l);
  c_.children_.insert(c_.children_.end(), children.begin(), children.end());
  c_.offsets_.push_back(static_cast<std::uint32_t>(c_.children_.size()));
  c_.decision_.push_back(decision);
  return id;
}

NodeId CircuitBuilder::false_node() {
  if (!false_)
    false_ = push(NodeKind::False, 0, {}, kBottom);
  return *false_;
}

NodeId CircuitBuilder::true_node() {
  if (!true_)
    true_ = push(NodeKind::True, 0, {}, kBottom);
  return *true_;
}

NodeId CircuitBuilder::literal(Lit l) {
  if (l == 0)
    throw StructureError("literal 0");
  auto it = literals_.find(l);
  if (it != literals_.end())
    return it->second;
  auto id = push(NodeKind::Literal, l, {}, kBottom);
  literals_.emplace(l, id);
  return id;
}

NodeId CircuitBuilder::and_node(std::span<const NodeId> children) {
  return push(NodeKind::And, 0, children, kBottom);
}

NodeId CircuitBuilder::or_node(std::span<const NodeId> children,
                               VnodeId decision) {
  return push(NodeKind::Or, 0, children, decision);
}

NodeId CircuitBuilder::import(const Circuit &c) {
  auto reach = reachable(c);
  std::vector<NodeId> map(c.size());
  std::vector<NodeId> kids;
  for (NodeId a = 0; a <= c.root(); ++a) {
    if (!reach[a])
      continue;
    kids.clear();
    for (NodeId ch : c.children(a))
      kids.push_back(map[ch]);
    switch (c.kind(a)) {
    case NodeKind::False:
      map[a] = false_node();
      break;
    case NodeKind::True:
      map[a] = true_node();
      break;
    case NodeKind::Literal:
      map[a] = literal(c.lit(a));
      break;
    case NodeKind::And:
      map[a] = and_node(kids);
      break;
    case NodeKind::Or:
      map[a] = or_node(kids);
      break;
    }
  }
  return map[c.root()];
}

Circuit CircuitBuilder::build(NodeId root, std::shared_ptr<const Vtree> vt,
                              std::size_t num_vars) {
  if (root >= c_.kinds_.size())
    throw StructureError("root id out of range");
  Circuit out = std::move(c_);
  c_ = Circuit{};
  false_.reset();
  true_.reset();
  literals_.clear();

  Var max_var = 0;
  for (Lit l : out.lits_)
    max_var = std::max(max_var, lit_var(l));
  if (num_vars == 0)
    num_vars = vt ? vt->num_vars() : max_var;
  if (vt && vt->num_vars() < num_vars)
    throw VtreeMismatchError("vtree has fewer variables than the circuit");
  if (max_var > num_vars)
    throw StructureError("literal mentions variable " +
                         std::to_string(max_var) + " beyond " +
                         std::to_string(num_vars) + " variables");
  out.root_ = root;
  out.num_vars_ = num_vars;
  out.vtree_ = std::move(vt);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Circuit

void Circuit::finalize() {
  const std::size_t m = kinds_.size();
  scopes_.assign(m, VarSet(num_vars_ + 1));
  for (NodeId a = 0; a < m; ++a) {
    if (kinds_[a] == NodeKind::Literal)
      scopes_[a].set(lit_var(lits_[a]));
    for (NodeId ch : children(a))
      scopes_[a] |= scopes_[ch];
  }
  dvnodes_.clear();
  if (!vtree_)
    return;
  dvnodes_.assign(m, kBottom);
  for (NodeId a = 0; a < m; ++a) {
    switch (kinds_[a]) {
    case NodeKind::False:
    case NodeKind::True:
      break;
    case NodeKind::Literal:
      dvnodes_[a] = vtree_->leaf_of(lit_var(lits_[a]));
      break;
    default: {
      VnodeId d = kBottom;
      for (NodeId ch : children(a))
        d = vtree_->lca(d, dvnodes_[ch]);
      dvnodes_[a] = d;
    }
    }
  }
}

bool Circuit::evaluate(const std::vector<bool> &assignment) const {
  std::vector<char> val(size());
  for (NodeId a = 0; a < size(); ++a) {
    switch (kinds_[a]) {
    case NodeKind::False:
      val[a] = 0;
      break;
    case NodeKind::True:
      val[a] = 1;
      break;
    case NodeKind::Literal:
      val[a] = assignment.at(lit_var(lits_[a])) == (lits_[a] > 0);
      break;
    case NodeKind::And:
      val[a] = 1;
      for (NodeId ch : children(a))
        if (!val[ch]) {
          val[a] = 0;
          break;
        }
      break;
    case NodeKind::Or:
      val[a] = 0;
      for (NodeId ch : children(a))
        if (val[ch]) {
          val[a] = 1;
          break;
        }
      break;
    }
    if (a == root_)
      return val[a];
  }
  return val[root_];
}

Circuit Circuit::with_vtree(std::shared_ptr<const Vtree> vt) const {
  if (vt && vt->num_vars() < num_vars_)
    throw VtreeMismatchError("vtree has fewer variables than the circuit");
  Circuit out = *this;
  out.num_vars_ = vt ? vt->num_vars() : num_vars_;
  out.vtree_ = std::move(vt);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Validation

const char *to_string(Determinism d) {
  switch (d) {
  case Determinism::Verified:
    return "verified";
  case Determinism::Assumed:
    return "assumed";
  case Determinism::Refuted:
    return "refuted";
  }
  return "?";
}

namespace {

/// True if the d-values `ds` (all non-bottom) can be split recursively
/// along the vtree, one side under w.left and the other under w.right.
bool separable(const Vtree &vt, std::span<const VnodeId> ds) {
  if (ds.size() <= 1)
    return true;
  VnodeId w = kBottom;
  for (VnodeId d : ds)
    w = vt.lca(w, d);
  if (vt.is_leaf(w))
    return false;
  std::vector<VnodeId> l, r;
  for (VnodeId d : ds) {
    if (vt.is_ancestor_or_self(vt.left(w), d))
      l.push_back(d);
    else if (vt.is_ancestor_or_self(vt.right(w), d))
      r.push_back(d);
    else
      return false;
  }
  return separable(vt, l) && separable(vt, r);
}

bool check_determinism(const Circuit &c, const std::vector<char> &reach,
                       ValidationReport &rep) {
  const std::size_t n = c.num_vars();
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<std::uint64_t> val(c.size());
  static constexpr std::uint64_t kPattern[6] = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  for (std::uint64_t base = 0; base < total; base += 64) {
    const std::uint64_t valid =
        total - base >= 64 ? ~std::uint64_t{0}
                           : (std::uint64_t{1} << (total - base)) - 1;
    auto var_word = [&](Var x) -> std::uint64_t {
      if (x - 1 < 6)
        return kPattern[x - 1];
      return ((base >> (x - 1)) & 1) ? ~std::uint64_t{0} : 0;
    };
    for (NodeId a = 0; a <= c.root(); ++a) {
      if (!reach[a])
        continue;
      switch (c.kind(a)) {
      case NodeKind::False:
        val[a] = 0;
        break;
      case NodeKind::True:
        val[a] = ~std::uint64_t{0};
        break;
      case NodeKind::Literal: {
        auto w = var_word(lit_var(c.lit(a)));
        val[a] = c.lit(a) > 0 ? w : ~w;
        break;
      }
      case NodeKind::And: {
        std::uint64_t w = ~std::uint64_t{0};
        for (NodeId ch : c.children(a))
          w &= val[ch];
        val[a] = w;
        break;
      }
      case NodeKind::Or: {
        std::uint64_t any = 0;
        for (NodeId ch : c.children(a)) {
          std::uint64_t clash = any & val[ch] & valid;
          if (clash) {
            auto bit = static_cast<std::uint64_t>(std::countr_zero(clash));
            std::uint64_t asg = base + bit;
            rep.counterexample.assign(n + 1, false);
            for (Var x = 1; x <= n; ++x)
              rep.counterexample[x] = (asg >> (x - 1)) & 1;
            rep.offending_node = a;
            return false;
          }
          any |= val[ch];
        }
        val[a] = any;
        break;
      }
      }
    }
  }
  return true;
}

} // namespace

ValidationReport validate(const Circuit &c, const ValidateOptions &opt) {
  ValidationReport rep;
  auto reach = reachable(c);

  rep.decomposable = true;
  rep.structured = c.has_vtree();
  for (NodeId a = 0; a < c.size(); ++a) {
    if (!reach[a] || c.kind(a) != NodeKind::And)
      continue;
    VarSet seen(c.num_vars() + 1);
    std::vector<VnodeId> ds;
    for (NodeId ch : c.children(a)) {
      if (seen.intersects(c.scope(ch)))
        rep.decomposable = false;
      seen |= c.scope(ch);
      if (c.has_vtree() && !c.scope(ch).none())
        ds.push_back(c.dvnode(ch));
    }
    if (rep.structured && !separable(c.vtree(), ds))
      rep.structured = false;
  }
  if (!rep.decomposable)
    rep.structured = false;

  if (c.num_vars() <= opt.determinism_bound && c.num_vars() < 40) {
    rep.basis = "enumeration";
    rep.deterministic = check_determinism(c, reach, rep)
                            ? Determinism::Verified
                            : Determinism::Refuted;
  } else if (opt.deterministic_by_construction) {
    rep.basis = "construction";
    rep.deterministic = Determinism::Assumed;
  } else {
    rep.basis = "unchecked";
    rep.deterministic = Determinism::Assumed;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

class Normalizer {
public:
  Normalizer(const Circuit &c, const NormalizeOptions &opt) : c_(c), opt_(opt) {}

  Circuit run() {
    auto reach = reachable(c_);
    std::vector<NodeId> map(c_.size());
    std::vector<char> constant_value(c_.size(), 0);
    for (NodeId a = 0; a <= c_.root(); ++a) {
      if (!reach[a])
        continue;
      if (c_.scope(a).none()) {
        bool v = false;
        switch (c_.kind(a)) {
        case NodeKind::True:
          v = true;
          break;
        case NodeKind::And:
          v = std::all_of(c_.children(a).begin(), c_.children(a).end(),
                          [&](NodeId ch) { return constant_value[ch]; });
          break;
        case NodeKind::Or:
          v = std::any_of(c_.children(a).begin(), c_.children(a).end(),
                          [&](NodeId ch) { return constant_value[ch]; });
          break;
        default:
          break;
        }
        constant_value[a] = v;
        map[a] = v ? b_true() : b_false();
        continue;
      }
      switch (c_.kind(a)) {
      case NodeKind::Literal:
        map[a] = add(b_.literal(c_.lit(a)),
                     c_.has_vtree() ? c_.vtree().leaf_of(lit_var(c_.lit(a)))
                                    : kBottom);
        break;
      case NodeKind::And:
        map[a] = conjoin(a, map);
        break;
      case NodeKind::Or:
        map[a] = disjoin(a, map);
        break;
      default:
        break;
      }
    }
    return compact(b_.build(map[c_.root()], c_.vtree_ptr(), c_.num_vars()));
  }

private:
  // Copies the nodes reachable from the root, keeping their order.
  static Circuit compact(Circuit c) {
    auto reach = reachable(c);
    if (std::all_of(reach.begin(), reach.end(), [](char r) { return r; }))
      return c;
    CircuitBuilder b;
    std::vector<NodeId> map(c.size());
    std::vector<NodeId> kids;
    for (NodeId a = 0; a < c.size(); ++a) {
      if (!reach[a])
        continue;
      kids.clear();
      for (NodeId ch : c.children(a))
        kids.push_back(map[ch]);
      switch (c.kind(a)) {
      case NodeKind::False:
        map[a] = b.false_node();
        break;
      case NodeKind::True:
        map[a] = b.true_node();
        break;
      case NodeKind::Literal:
        map[a] = b.literal(c.lit(a));
        break;
      case NodeKind::And:
        map[a] = b.and_node(kids);
        break;
      case NodeKind::Or:
        map[a] = b.or_node(kids, c.decision_vnode(a));
        break;
      }
    }
    return b.build(map[c.root()], c.vtree_ptr(), c.num_vars());
  }

  NodeId add(NodeId id, VnodeId d) {
    if (dv_.size() <= id)
      dv_.resize(id + 1, kBottom);
    dv_[id] = d;
    return id;
  }
  NodeId b_true() { return add(b_.true_node(), kBottom); }
  NodeId b_false() { return add(b_.false_node(), kBottom); }
  bool is_const(NodeId id) const {
    auto k = b_.kind(id);
    return k == NodeKind::True || k == NodeKind::False;
  }

  NodeId conjoin(NodeId a, const std::vector<NodeId> &map) {
    std::vector<NodeId> kids;
    for (NodeId ch : c_.children(a)) {
      NodeId m = map[ch];
      if (b_.kind(m) == NodeKind::False)
        return b_false();
      if (b_.kind(m) == NodeKind::True)
        continue;
      kids.push_back(m);
    }
    if (kids.empty())
      return b_true();
    if (kids.size() == 1)
      return kids[0];
    if (!c_.has_vtree()) {
      NodeId acc = kids.back();
      for (std::size_t i = kids.size() - 1; i-- > 0;) {
        NodeId pair[2] = {kids[i], acc};
        acc = add(b_.and_node(pair), kBottom);
      }
      return acc;
    }
    return split(kids, a);
  }

  NodeId split(std::span<const NodeId> kids, NodeId origin) {
    if (kids.size() == 1)
      return kids[0];
    const Vtree &vt = c_.vtree();
    VnodeId w = kBottom;
    for (NodeId k : kids)
      w = vt.lca(w, dv_[k]);
    std::vector<NodeId> l, r;
    if (!vt.is_leaf(w)) {
      for (NodeId k : kids) {
        if (vt.is_ancestor_or_self(vt.left(w), dv_[k]))
          l.push_back(k);
        else if (vt.is_ancestor_or_self(vt.right(w), dv_[k]))
          r.push_back(k);
        else
          break;
      }
    }
    if (l.size() + r.size() != kids.size() || l.empty() || r.empty())
      throw StructureError("and-node " + std::to_string(origin) +
                           " cannot be split along the vtree");
    NodeId pair[2] = {split(l, origin), split(r, origin)};
    return add(b_.and_node(pair), w);
  }

  NodeId disjoin(NodeId a, const std::vector<NodeId> &map) {
    std::vector<NodeId> kids;
    for (NodeId ch : c_.children(a)) {
      NodeId m = map[ch];
      if (opt_.eliminate_false && b_.kind(m) == NodeKind::False)
        continue;
      kids.push_back(m);
    }
    if (kids.empty())
      return b_false();
    if (kids.size() == 1)
      return kids[0];
    VnodeId d = kBottom;
    if (c_.has_vtree())
      for (NodeId k : kids)
        d = c_.vtree().lca(d, dv_[k]);
    return add(b_.or_node(kids), d);
  }

  const Circuit &c_;
  NormalizeOptions opt_;
  CircuitBuilder b_;
  std::vector<VnodeId> dv_;
};

} // namespace

Circuit normalize(const Circuit &c, const NormalizeOptions &opt) {
  return Normalizer(c, opt).run();
}

std::uint64_t fingerprint(const Circuit &c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(c.size());
  mix(c.root());
  for (NodeId a = 0; a < c.size(); ++a) {
    mix(static_cast<std::uint64_t>(c.kind(a)));
    mix(static_cast<std::uint32_t>(c.lit(a)));
    for (NodeId ch : c.children(a))
      mix(ch);
  }
  return h;
}

bool is_engine_ready(const Circuit &c) {
  if (!c.has_vtree())
    return false;
  const Vtree &vt = c.vtree();
  for (NodeId a = 0; a < c.size(); ++a) {
    if (c.kind(a) != NodeKind::And)
      continue;
    auto ch = c.children(a);
    if (ch.size() != 2 || c.is_constant(ch[0]) || c.is_constant(ch[1]))
      return false;
    VnodeId d = c.dvnode(a);
    if (vt.is_leaf(d) || !vt.is_ancestor_or_self(vt.left(d), c.dvnode(ch[0])) ||
        !vt.is_ancestor_or_self(vt.right(d), c.dvnode(ch[1])))
      return false;
  }
  return true;
}

bool same_structure(const Circuit &a, const Circuit &b) {
  if (a.size() != b.size() || a.root() != b.root() ||
      a.num_vars() != b.num_vars())
    return false;
  for (NodeId x = 0; x < a.size(); ++x) {
    if (a.kind(x) != b.kind(x) || a.lit(x) != b.lit(x))
      return false;
    auto ca = a.children(x);
    auto cb = b.children(x);
    if (!std::equal(ca.begin(), ca.end(), cb.begin(), cb.end()))
      return false;
  }
  return true;
}

VnodeId deepest_covering_vnode(const Vtree &vt, const VarSet &vars) {
  if (vars.none())
    return kBottom;
  VnodeId best = kBottom;
  for (VnodeId v : vt.postorder()) {
    if (vars.is_subset_of(vt.scope(v)) &&
        (best == kBottom || vt.depth(v) > vt.depth(best)))
      best = v;
  }
  return best;
}

} // namespace wmcvar
