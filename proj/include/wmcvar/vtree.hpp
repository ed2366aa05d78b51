#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wmcvar {

/// Boolean variable id. Variables are dense: 1..n.
using Var = std::uint32_t;
/// Vtree node id. Id 0 is the empty-scope sentinel, real vnodes are 1..m.
using VnodeId = std::uint32_t;

inline constexpr VnodeId kBottom = 0;

/// Set of variables, indexed by variable id (bit 0 is unused).
using VarSet = boost::dynamic_bitset<>;

/// Rooted binary tree whose leaves are labelled by the variables 1..n, each
/// exactly once. Immutable after construction.
///
/// The sentinel vnode `kBottom` has an empty scope and behaves as a
/// descendant of every other vnode: lca(kBottom, v) == v.
class Vtree {
public:
  class Builder;

  std::size_t num_vars() const noexcept { return leaf_of_var_.size() - 1; }
  /// Number of real vnodes (2n - 1).
  std::size_t num_vnodes() const noexcept { return nodes_.size() - 1; }
  VnodeId root() const noexcept { return root_; }

  bool is_leaf(VnodeId v) const { return nodes_[v].var != 0; }
  Var var(VnodeId v) const { return nodes_[v].var; }
  VnodeId left(VnodeId v) const { return nodes_[v].left; }
  VnodeId right(VnodeId v) const { return nodes_[v].right; }
  VnodeId parent(VnodeId v) const { return nodes_[v].parent; }
  std::uint32_t depth(VnodeId v) const { return nodes_[v].depth; }
  const VarSet &scope(VnodeId v) const { return scopes_[v]; }
  VnodeId leaf_of(Var x) const { return leaf_of_var_.at(x); }

  /// Id used for `v` in the text format.
  std::int64_t file_id(VnodeId v) const { return nodes_[v].file_id; }
  /// Vnode with the given text-format id, or kBottom if there is none.
  VnodeId find_file_id(std::int64_t id) const;

  /// Deepest common ancestor, O(1).
  VnodeId lca(VnodeId v, VnodeId w) const;
  /// True iff `w` is `v` or an ancestor of `v`. Every vnode is an ancestor
  /// of kBottom.
  bool is_ancestor_or_self(VnodeId w, VnodeId v) const;

  /// Vnodes ordered children-first.
  const std::vector<VnodeId> &postorder() const noexcept { return postorder_; }

  /// Structural equality: same shape, same variable labels.
  bool same_structure(const Vtree &other) const;

  static Vtree balanced(std::span<const Var> order);
  static Vtree right_linear(std::span<const Var> order);
  static Vtree left_linear(std::span<const Var> order);
  /// New root with `left` and `right` as its subtrees.
  static Vtree join(const Vtree &left, const Vtree &right);

private:
  struct Vnode {
    Var var = 0;
    VnodeId left = kBottom;
    VnodeId right = kBottom;
    VnodeId parent = kBottom;
    std::uint32_t depth = std::numeric_limits<std::uint32_t>::max();
    std::int64_t file_id = -1;
  };

  Vtree() = default;
  void finalize();
  bool same_below(const Vtree &other, VnodeId v, VnodeId w) const;

  std::vector<Vnode> nodes_;
  std::vector<VarSet> scopes_;
  std::vector<VnodeId> leaf_of_var_;
  std::vector<VnodeId> postorder_;
  VnodeId root_ = kBottom;
  std::unordered_map<std::int64_t, VnodeId> by_file_id_;

  // Euler tour + sparse table for LCA, and entry/exit times for ancestry.
  std::vector<std::uint32_t> first_;
  std::vector<std::uint32_t> tin_;
  std::vector<std::uint32_t> tout_;
  std::vector<std::vector<VnodeId>> sparse_;
  std::vector<std::uint8_t> log2_;
};

/// Incremental construction of a vtree. Children must be created before
/// their parent.
class Vtree::Builder {
public:
  VnodeId leaf(Var x, std::int64_t file_id = -1);
  VnodeId internal(VnodeId left, VnodeId right, std::int64_t file_id = -1);
  /// Copies all of `vt` (without its file ids); returns the copy's root.
  VnodeId copy(const Vtree &vt);
  /// Validates the tree (single root, every variable 1..n exactly once).
  /// Throws ParseError on violations.
  Vtree build();

private:
  std::vector<Vnode> nodes_{Vnode{}};
};

Vtree parse_vtree(std::string_view text);
std::string print_vtree(const Vtree &vt);

} // namespace wmcvar
