#include "wmcvar/moments.hpp"

#include "wmcvar/error.hpp"

#include <cmath>

namespace wmcvar {

// ---------------------------------------------------------------------------
// Tables

template <class T>
MomentTables<T>::MomentTables(std::shared_ptr<const Vtree> vt,
                              const WeightModel &w)
    : vt_(std::move(vt)) {
  if (!vt_)
    throw StructureError("moment tables need a vtree");
  const Vtree &t = *vt_;
  const std::size_t n = t.num_vars();
  w.check(n);

  leaves_.resize(n + 1);
  for (Var x = 1; x <= n; ++x) {
    const auto &r = w[x];
    leaves_[x] = {from_double<T>(r.muP), from_double<T>(r.muN),
                  from_double<T>(r.varP), from_double<T>(r.varN),
                  from_double<T>(r.covPN)};
  }

  const std::size_t m = t.num_vnodes() + 1;
  ev_.assign(m, T(1));
  vv_.assign(m, T(0));
  for (VnodeId v : t.postorder()) {
    if (t.is_leaf(v)) {
      const Leaf &lf = leaves_[t.var(v)];
      ev_[v] = lf.muP + lf.muN;
      vv_[v] = lf.varP + lf.varN + 2 * lf.covPN;
    } else {
      const T &el = ev_[t.left(v)], &er = ev_[t.right(v)];
      const T &vl = vv_[t.left(v)], &vr = vv_[t.right(v)];
      ev_[v] = el * er;
      vv_[v] = vl * vr + vl * er * er + el * el * vr;
    }
  }

  off_.assign(m, 0);
  std::size_t total = 0;
  for (VnodeId v = 1; v < m; ++v) {
    off_[v] = total;
    total += t.depth(v) + 1;
  }
  ea_.assign(total, T(0));
  va_.assign(total, T(0));
  for (VnodeId v = 1; v < m; ++v) {
    T *ea = ea_.data() + off_[v];
    T *va = va_.data() + off_[v];
    ea[t.depth(v)] = 1;
    va[t.depth(v)] = 0;
    for (VnodeId wv = v; t.parent(wv) != kBottom; wv = t.parent(wv)) {
      VnodeId p = t.parent(wv);
      VnodeId sib = t.left(p) == wv ? t.right(p) : t.left(p);
      const T &etmp = ev_[sib];
      const T &vtmp = vv_[sib];
      const T &eaw = ea[t.depth(wv)];
      const T &vaw = va[t.depth(wv)];
      ea[t.depth(p)] = eaw * etmp;
      va[t.depth(p)] = vaw * vtmp + vaw * etmp * etmp + eaw * eaw * vtmp;
    }
  }

  group_at_.assign(m, -1);
  inside_group_.assign(m, 0);
  group_of_var_.assign(n + 1, -1);
  grouped_count_.assign(m, 0);
  for (const auto &g : w.groups()) {
    const int gi = static_cast<int>(groups_.size());
    VnodeId v = kBottom;
    for (Var x : g.members) {
      if (x == 0 || x > n)
        throw WeightError("group member outside the vtree");
      group_of_var_[x] = gi;
      v = t.lca(v, t.leaf_of(x));
    }
    if (t.scope(v).count() != g.members.size())
      throw WeightError("no vnode has exactly the members of group " +
                        std::to_string(gi) + " as its scope");
    group_at_[v] = gi;
    for (VnodeId u : t.postorder())
      if (u != v && t.is_ancestor_or_self(v, u))
        inside_group_[u] = 1;

    Group grp;
    grp.members = g.members;
    const std::size_t k = g.members.size();
    grp.cov.assign(k, std::vector<T>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        grp.cov[i][j] = from_double<T>(g.cov[i][j]);
    grp.nprod_all = 1;
    for (Var x : g.members)
      grp.nprod_all *= leaves_[x].muN;
    grp.nprod_except.assign(k, T(1));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (i != j)
          grp.nprod_except[i] *= leaves_[g.members[j]].muN;
    groups_.push_back(std::move(grp));
  }
  if (!groups_.empty())
    for (VnodeId v : t.postorder())
      grouped_count_[v] =
          t.is_leaf(v) ? (group_of_var_[t.var(v)] >= 0 ? 1u : 0u)
                       : grouped_count_[t.left(v)] + grouped_count_[t.right(v)];
}

template <class T>
int MomentTables<T>::member_index(int g, Var x) const {
  const auto &mem = groups_[g].members;
  for (std::size_t i = 0; i < mem.size(); ++i)
    if (mem[i] == x)
      return static_cast<int>(i);
  return -1;
}

template <class T> void MomentTables<T>::check_clean(VnodeId w) const {
  if (!groups_.empty() && grouped_count_[w] != 0)
    throw StructureError("adjustment over correlated parameter variables at "
                         "vnode " +
                         std::to_string(vt_->file_id(w)));
}

template <class T>
void MomentTables<T>::check_clean(VnodeId w, VnodeId v) const {
  if (!groups_.empty() && grouped_count_[w] != grouped_count_[v])
    throw StructureError("adjustment over correlated parameter variables "
                         "between vnodes " +
                         std::to_string(vt_->file_id(v)) + " and " +
                         std::to_string(vt_->file_id(w)));
}

template <class T>
T MomentTables<T>::adj_exp(VnodeId w, const MomentResult<T> &r) const {
  if (ScalarTraits<T>::is_zero(r.value))
    return T(0);
  if (r.anchor == kBottom) {
    check_clean(w);
    return ev_[w] * r.value;
  }
  if (!vt_->is_ancestor_or_self(w, r.anchor))
    throw StructureError("adjustment target does not contain the anchor");
  check_clean(w, r.anchor);
  return ea(w, r.anchor) * r.value;
}

template <class T>
T MomentTables<T>::adj_cov(VnodeId w, const MomentResult<T> &c,
                           const MomentResult<T> &f,
                           const MomentResult<T> &g) const {
  if (c.anchor == kBottom) {
    if (ScalarTraits<T>::is_zero(f.value) || ScalarTraits<T>::is_zero(g.value))
      return T(0);
    check_clean(w);
    return vv_[w] * f.value * g.value;
  }
  const VnodeId v = c.anchor;
  T atmp = adj_exp(v, f);
  T btmp = adj_exp(v, g);
  if (ScalarTraits<T>::is_zero(c.value) &&
      (ScalarTraits<T>::is_zero(atmp) || ScalarTraits<T>::is_zero(btmp)))
    return T(0);
  if (!vt_->is_ancestor_or_self(w, v))
    throw StructureError("adjustment target does not contain the anchor");
  check_clean(w, v);
  const T &a = ea(w, v);
  const T &s = va(w, v);
  return s * c.value + s * atmp * btmp + a * a * c.value;
}

// ---------------------------------------------------------------------------
// Session

template <class T>
MomentSession<T>::MomentSession(const MomentTables<T> &t,
                                const std::vector<const Circuit *> &circuits)
    : t_(t), vt_(t.vtree()) {
  for (const Circuit *c : circuits) {
    if (!c->has_vtree())
      throw VtreeMismatchError("circuit has no vtree");
    std::optional<Circuit> local;
    const Circuit *use = c;
    if (c->vtree_ptr() != t.vtree_ptr()) {
      if (!c->vtree().same_structure(vt_))
        throw VtreeMismatchError("circuits respect different vtrees");
      local = c->with_vtree(t.vtree_ptr());
      use = &*local;
    }
    if (!is_engine_ready(*use)) {
      local = normalize(*use);
      use = &*local;
      if (!is_engine_ready(*use))
        throw StructureError("circuit is not structured by the vtree");
    }
    roots_.push_back(add_circuit(*use));
  }
  bool have_true = false;
  for (NodeId a = 0; a < kind_.size(); ++a)
    if (kind_[a] == NodeKind::True) {
      true_ = a;
      have_true = true;
      break;
    }
  if (!have_true) {
    true_ = static_cast<NodeId>(kind_.size());
    kind_.push_back(NodeKind::True);
    lit_.push_back(0);
    off_.push_back(static_cast<std::uint32_t>(kids_.size()));
    dv_.push_back(kBottom);
  }
  compute_expectations();
  if (t_.has_groups())
    compute_patterns();
}

template <class T> NodeId MomentSession<T>::add_circuit(const Circuit &c) {
  std::vector<NodeId> map(c.size());
  for (NodeId a = 0; a < c.size(); ++a) {
    const NodeKind k = c.kind(a);
    if (k != NodeKind::And && k != NodeKind::Or) {
      // constants and literals are shared across circuits
      const std::int64_t lk =
          k == NodeKind::Literal ? c.lit(a) : (std::int64_t{1} << 40) + int(k);
      auto [it, fresh] =
          leaf_ids_.try_emplace(lk, static_cast<NodeId>(kind_.size()));
      if (!fresh) {
        map[a] = it->second;
        continue;
      }
    }
    map[a] = static_cast<NodeId>(kind_.size());
    kind_.push_back(k);
    lit_.push_back(c.lit(a));
    for (NodeId ch : c.children(a))
      kids_.push_back(map[ch]);
    off_.push_back(static_cast<std::uint32_t>(kids_.size()));
    dv_.push_back(c.dvnode(a));
  }
  return map[c.root()];
}

template <class T> void MomentSession<T>::compute_expectations() {
  e_.assign(kind_.size(), T(0));
  for (NodeId a = 0; a < kind_.size(); ++a) {
    const std::span<const NodeId> ch(kids_.data() + off_[a],
                                     off_[a + 1] - off_[a]);
    switch (kind_[a]) {
    case NodeKind::False:
      e_[a] = 0;
      break;
    case NodeKind::True:
      e_[a] = 1;
      break;
    case NodeKind::Literal: {
      const auto &lf = t_.leaf(lit_var(lit_[a]));
      e_[a] = lit_[a] > 0 ? lf.muP : lf.muN;
      break;
    }
    case NodeKind::Or: {
      T r(0);
      for (NodeId c : ch)
        r += t_.adj_exp(dv_[a], exp(c));
      e_[a] = std::move(r);
      break;
    }
    case NodeKind::And:
      e_[a] = t_.adj_exp(vt_.left(dv_[a]), exp(ch[0])) *
              t_.adj_exp(vt_.right(dv_[a]), exp(ch[1]));
      break;
    }
  }
}

template <class T> void MomentSession<T>::compute_patterns() {
  const std::size_t m = kind_.size();
  pat_group_.assign(m, -1);
  pat_pos_.assign(m, 0);
  pat_count_.assign(m, 0);
  for (NodeId a = 0; a < m; ++a) {
    if (kind_[a] == NodeKind::Literal) {
      Var x = lit_var(lit_[a]);
      pat_group_[a] = t_.group_of(x);
      pat_pos_[a] = lit_[a] > 0 ? x : 0;
      pat_count_[a] = 1;
    } else if (kind_[a] == NodeKind::And) {
      NodeId l = kids_[off_[a]], r = kids_[off_[a] + 1];
      if (pat_group_[l] < 0 || pat_group_[l] != pat_group_[r] ||
          (pat_pos_[l] != 0 && pat_pos_[r] != 0))
        continue;
      pat_group_[a] = pat_group_[l];
      pat_pos_[a] = pat_pos_[l] != 0 ? pat_pos_[l] : pat_pos_[r];
      pat_count_[a] = pat_count_[l] + pat_count_[r];
    }
  }
}

template <class T>
const typename MomentSession<T>::Entry *MomentSession<T>::lookup(NodeId a,
                                                                 NodeId b) {
  auto it = memo_.find(key(a, b));
  if (it == memo_.end()) {
    missing_.emplace_back(a, b);
    return nullptr;
  }
  return &it->second;
}

template <class T> T MomentSession<T>::leaf_cov(NodeId a, NodeId b) const {
  if (kind_[a] == NodeKind::True)
    std::swap(a, b);
  const Lit la = lit_[a];
  const auto &lf = t_.leaf(lit_var(la));
  if (kind_[b] == NodeKind::True)
    return la > 0 ? T(lf.varP + lf.covPN) : T(lf.varN + lf.covPN);
  const Lit lb = lit_[b];
  if (lit_var(la) != lit_var(lb))
    throw StructureError("leaf pair over different variables");
  if (la == lb)
    return la > 0 ? lf.varP : lf.varN;
  return lf.covPN;
}

template <class T>
T MomentSession<T>::group_cov(NodeId a, NodeId b, VnodeId anc) const {
  const int g = t_.group_at(anc);
  const auto &grp = t_.group(g);
  auto classify = [&](NodeId n) -> int {
    if (kind_[n] == NodeKind::True)
      throw StructureError("true extended over a parameter group");
    if (pat_group_[n] != g || pat_count_[n] != grp.members.size())
      throw StructureError("node at a parameter-group vnode is not a "
                           "single-parameter pattern");
    return pat_pos_[n] == 0 ? 0 : t_.member_index(g, pat_pos_[n]) + 1;
  };
  const int j = classify(a);
  const int k = classify(b);
  if (j == 0 || k == 0)
    return T(0);
  return grp.cov[j - 1][k - 1] * grp.nprod_except[j - 1] *
         grp.nprod_except[k - 1];
}

template <class T> bool MomentSession<T>::step(NodeId a, NodeId b) {
  if (a > b)
    std::swap(a, b);
  const VnodeId da = dv_[a], db = dv_[b];
  const VnodeId anc = vt_.lca(da, db);
  auto store = [&](VnodeId v, T val) {
    memo_.emplace(key(a, b), Entry{v, std::move(val)});
    return true;
  };
  auto children = [&](NodeId n) {
    return std::span<const NodeId>(kids_.data() + off_[n],
                                   off_[n + 1] - off_[n]);
  };
  auto is_leaf = [&](NodeId n) {
    return kind_[n] != NodeKind::And && kind_[n] != NodeKind::Or;
  };
  const MomentResult<T> et{kBottom, T(1)};

  if (kind_[a] == NodeKind::False || kind_[b] == NodeKind::False)
    return store(anc, T(0));
  if (kind_[a] == NodeKind::True && kind_[b] == NodeKind::True)
    return store(kBottom, T(0));

  if (anc != da && anc != db) {
    NodeId x = a, y = b;
    if (!vt_.is_ancestor_or_self(vt_.left(anc), da))
      std::swap(x, y);
    const Entry *cle = lookup(x, true_);
    const Entry *cre = lookup(true_, y);
    if (!cle || !cre)
      return false;
    const VnodeId l = vt_.left(anc), r = vt_.right(anc);
    T el = t_.adj_exp(l, exp(x)) * t_.adj_exp(l, et);
    T er = t_.adj_exp(r, et) * t_.adj_exp(r, exp(y));
    T cl = t_.adj_cov(l, {cle->anc, cle->value}, exp(x), et);
    T cr = t_.adj_cov(r, {cre->anc, cre->value}, et, exp(y));
    return store(anc, cl * cr + cl * er + el * cr);
  }

  if (t_.has_groups()) {
    if (t_.group_at(anc) >= 0)
      return store(anc, group_cov(a, b, anc));
    if (t_.inside_group(anc))
      throw StructureError("covariance requested strictly inside a "
                           "parameter group");
  }

  if (is_leaf(a) && is_leaf(b))
    return store(anc, leaf_cov(a, b));

  NodeId x = a, y = b;
  if ((anc == db && db != da) ||
      (da == db && kind_[b] == NodeKind::Or && kind_[a] != NodeKind::Or))
    std::swap(x, y);
  const VnodeId dy = dv_[y];

  if (kind_[x] == NodeKind::Or) {
    auto ch = children(x);
    scratch_.clear();
    bool ready = true;
    for (NodeId c : ch) {
      const Entry *e = lookup(c, y);
      ready = ready && e;
      scratch_.push_back(e);
    }
    if (!ready)
      return false;
    T r(0);
    for (std::size_t i = 0; i < ch.size(); ++i)
      r += t_.adj_cov(anc, {scratch_[i]->anc, scratch_[i]->value}, exp(ch[i]),
                      exp(y));
    return store(anc, std::move(r));
  }
  if (kind_[x] != NodeKind::And || dv_[x] != anc)
    throw StructureError("unexpected node pair in covariance recursion");

  const VnodeId L = vt_.left(anc), R = vt_.right(anc);
  const NodeId xl = children(x)[0], xr = children(x)[1];
  NodeId yl, yr;
  if (vt_.is_ancestor_or_self(L, dy)) {
    yl = y;
    yr = true_;
  } else if (vt_.is_ancestor_or_self(R, dy)) {
    yl = true_;
    yr = y;
  } else {
    if (kind_[y] != NodeKind::And || dy != anc)
      throw StructureError("unexpected node pair in covariance recursion");
    yl = children(y)[0];
    yr = children(y)[1];
  }
  const Entry *cle = lookup(xl, yl);
  const Entry *cre = lookup(xr, yr);
  if (!cle || !cre)
    return false;
  T el = t_.adj_exp(L, exp(xl)) * t_.adj_exp(L, exp(yl));
  T er = t_.adj_exp(R, exp(xr)) * t_.adj_exp(R, exp(yr));
  T cl = t_.adj_cov(L, {cle->anc, cle->value}, exp(xl), exp(yl));
  T cr = t_.adj_cov(R, {cre->anc, cre->value}, exp(xr), exp(yr));
  return store(anc, cl * cr + cl * er + el * cr);
}

template <class T>
MomentResult<T> MomentSession<T>::cov(NodeId a, NodeId b) {
  if (auto it = memo_.find(key(a, b)); it != memo_.end())
    return {it->second.anc, it->second.value};
  std::vector<std::pair<NodeId, NodeId>> stack{{a, b}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    if (memo_.contains(key(x, y))) {
      stack.pop_back();
      continue;
    }
    missing_.clear();
    if (step(x, y)) {
      stack.pop_back();
      continue;
    }
    stack.insert(stack.end(), missing_.begin(), missing_.end());
  }
  const Entry &e = memo_.at(key(a, b));
  return {e.anc, e.value};
}

template <class T> T MomentSession<T>::expectation(std::size_t i) const {
  return t_.adj_exp(vt_.root(), exp(roots_[i]));
}

template <class T>
T MomentSession<T>::covariance(std::size_t i, std::size_t j) {
  auto c = cov(roots_[i], roots_[j]);
  return t_.adj_cov(vt_.root(), c, exp(roots_[i]), exp(roots_[j]));
}

// ---------------------------------------------------------------------------
// Convenience queries

template <class T> T exp_wmc(const MomentTables<T> &t, const Circuit &c) {
  MomentSession<T> s(t, {&c});
  return s.expectation(0);
}

template <class T> T var_wmc(const MomentTables<T> &t, const Circuit &c) {
  MomentSession<T> s(t, {&c});
  return s.variance(0);
}

template <class T>
T cov_wmc(const MomentTables<T> &t, const Circuit &f, const Circuit &g) {
  // Argument order must not change the summation order.
  const bool swap = fingerprint(g) < fingerprint(f);
  MomentSession<T> s(t, {swap ? &g : &f, swap ? &f : &g});
  return s.covariance(0, 1);
}

template <class T>
T conditional_var_taylor(const MomentTables<T> &t, const Circuit &h_prime,
                         const Circuit &h) {
  MomentSession<T> s(t, {&h_prime, &h});
  const T ehp = s.expectation(0);
  const T eh = s.expectation(1);
  if (std::abs(to_double(eh)) < 1e-12)
    throw DomainError("E[W_h] is too close to zero for the expansion");
  const T vhp = s.variance(0);
  const T vh = s.variance(1);
  const T c = s.covariance(0, 1);
  const T eh2 = eh * eh;
  return vhp / eh2 - 2 * c * ehp / (eh2 * eh) +
         vh * ehp * ehp / (eh2 * eh2);
}

template class MomentTables<double>;
template class MomentTables<Rational>;
template class MomentSession<double>;
template class MomentSession<Rational>;

#define WMCVAR_INSTANTIATE(T)                                                  \
  template T exp_wmc<T>(const MomentTables<T> &, const Circuit &);             \
  template T var_wmc<T>(const MomentTables<T> &, const Circuit &);             \
  template T cov_wmc<T>(const MomentTables<T> &, const Circuit &,              \
                        const Circuit &);                                      \
  template T conditional_var_taylor<T>(const MomentTables<T> &,                \
                                       const Circuit &, const Circuit &);
WMCVAR_INSTANTIATE(double)
WMCVAR_INSTANTIATE(Rational)
#undef WMCVAR_INSTANTIATE

} // namespace wmcvar
