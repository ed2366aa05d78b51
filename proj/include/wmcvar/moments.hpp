#pragma once

#include "wmcvar/circuit.hpp"
#include "wmcvar/scalar.hpp"
#include "wmcvar/weights.hpp"

#include <absl/container/flat_hash_map.h>

#include <memory>
#include <vector>

namespace wmcvar {

/// A moment over the variable set Var(anchor).
template <class T> struct MomentResult {
  VnodeId anchor = kBottom;
  T value{};
};

/// Per-vtree tables: moments of W_true over Var(v) and over
/// Var(w) \ Var(v) for every ancestor w of v, plus the directory of
/// correlated parameter groups.
template <class T> class MomentTables {
public:
  MomentTables(std::shared_ptr<const Vtree> vt, const WeightModel &w);

  const Vtree &vtree() const { return *vt_; }
  const std::shared_ptr<const Vtree> &vtree_ptr() const { return vt_; }

  const T &ev(VnodeId v) const { return ev_[v]; }
  const T &vv(VnodeId v) const { return vv_[v]; }
  /// Requires w to be an ancestor of v (or v itself).
  const T &ea(VnodeId w, VnodeId v) const {
    return ea_[off_[v] + vt_->depth(w)];
  }
  const T &va(VnodeId w, VnodeId v) const {
    return va_[off_[v] + vt_->depth(w)];
  }

  /// E[W_f over Var(w)] from E[W_f over Var(r.anchor)].
  T adj_exp(VnodeId w, const MomentResult<T> &r) const;
  /// Cov[W_f, W_g over Var(w)] from the covariance over Var(c.anchor) and
  /// both expectations.
  T adj_cov(VnodeId w, const MomentResult<T> &c, const MomentResult<T> &f,
            const MomentResult<T> &g) const;

  struct Leaf {
    T muP, muN, varP, varN, covPN;
  };
  const Leaf &leaf(Var x) const { return leaves_[x]; }

  bool has_groups() const { return !groups_.empty(); }
  /// Group whose members are exactly Var(v), or -1.
  int group_at(VnodeId v) const { return group_at_[v]; }
  /// True if v lies strictly below a group vnode.
  bool inside_group(VnodeId v) const { return inside_group_[v] != 0; }
  /// Group of variable x, or -1.
  int group_of(Var x) const { return group_of_var_[x]; }
  struct Group {
    std::vector<Var> members;
    std::vector<std::vector<T>> cov;
    /// Product of the members' expected N-weights, excluding member j.
    std::vector<T> nprod_except;
    /// Product of all members' expected N-weights.
    T nprod_all;
  };
  const Group &group(int g) const { return groups_[g]; }
  int member_index(int g, Var x) const;

private:
  void check_clean(VnodeId w) const;
  void check_clean(VnodeId w, VnodeId v) const;

  std::shared_ptr<const Vtree> vt_;
  std::vector<Leaf> leaves_;
  std::vector<T> ev_, vv_;
  std::vector<std::size_t> off_;
  std::vector<T> ea_, va_;

  std::vector<Group> groups_;
  std::vector<int> group_at_;
  std::vector<char> inside_group_;
  std::vector<int> group_of_var_;
  std::vector<std::uint32_t> grouped_count_;
};

/// Covariance queries over one or more circuits respecting the tables'
/// vtree. Nodes of all circuits live in one shared id space, so pairs
/// across circuits are memoized like any other pair.
template <class T> class MomentSession {
public:
  /// Circuits are normalized first unless already engine-ready.
  MomentSession(const MomentTables<T> &t,
                const std::vector<const Circuit *> &circuits);

  std::size_t size() const { return kind_.size(); }
  /// Root of circuit i in the shared id space.
  NodeId root(std::size_t i) const { return roots_[i]; }
  NodeId true_node() const { return true_; }

  /// e[a]: (d(a), E[W_a over Var(d(a))]).
  MomentResult<T> exp(NodeId a) const { return {dv_[a], e_[a]}; }
  /// (LCA(d(a), d(b)), Cov[W_a, W_b] over that vnode's scope).
  MomentResult<T> cov(NodeId a, NodeId b);

  T expectation(std::size_t i) const;
  T variance(std::size_t i) { return covariance(i, i); }
  T covariance(std::size_t i, std::size_t j);

  std::size_t memo_size() const { return memo_.size(); }

private:
  struct Entry {
    VnodeId anc;
    T value;
  };

  NodeId add_circuit(const Circuit &c);
  void compute_expectations();
  void compute_patterns();
  /// Attempts COV(a, b); returns false and records missing sub-pairs when
  /// some are not memoized yet.
  bool step(NodeId a, NodeId b);
  const Entry *lookup(NodeId a, NodeId b);
  T leaf_cov(NodeId a, NodeId b) const;
  T group_cov(NodeId a, NodeId b, VnodeId anc) const;

  static std::uint64_t key(NodeId a, NodeId b) {
    if (a > b)
      std::swap(a, b);
    return (std::uint64_t{a} << 32) | b;
  }

  const MomentTables<T> &t_;
  const Vtree &vt_;

  std::vector<NodeKind> kind_;
  std::vector<Lit> lit_;
  std::vector<std::uint32_t> off_{0};
  std::vector<NodeId> kids_;
  std::vector<VnodeId> dv_;
  std::vector<T> e_;
  std::vector<NodeId> roots_;
  NodeId true_ = 0;

  // Parameter-group pattern of each node: group index (-1 if the node is
  // not a cube over one group), positive member (0 if none), literal count.
  std::vector<int> pat_group_;
  std::vector<Var> pat_pos_;
  std::vector<std::uint32_t> pat_count_;

  absl::flat_hash_map<std::uint64_t, Entry> memo_;
  std::vector<std::pair<NodeId, NodeId>> missing_;
  std::vector<const Entry *> scratch_;
  absl::flat_hash_map<std::int64_t, NodeId> leaf_ids_;
};

template <class T> T exp_wmc(const MomentTables<T> &t, const Circuit &c);
template <class T> T var_wmc(const MomentTables<T> &t, const Circuit &c);
template <class T>
T cov_wmc(const MomentTables<T> &t, const Circuit &f, const Circuit &g);

/// Var[W_h' / W_h] to second order:
/// Var(h')/E(h)^2 - 2 Cov(h', h) E(h') / E(h)^3 + Var(h) E(h')^2 / E(h)^4.
/// Throws DomainError when |E[W_h]| < 1e-12.
template <class T>
T conditional_var_taylor(const MomentTables<T> &t, const Circuit &h_prime,
                         const Circuit &h);

extern template class MomentTables<double>;
extern template class MomentTables<Rational>;
extern template class MomentSession<double>;
extern template class MomentSession<Rational>;

} // namespace wmcvar
