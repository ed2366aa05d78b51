#pragma once

#include "wmcvar/vtree.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wmcvar {

using NodeId = std::uint32_t;
/// Signed literal: +x or -x for variable x.
using Lit = std::int32_t;

enum class NodeKind : std::uint8_t { False, True, Literal, And, Or };

inline Var lit_var(Lit l) { return static_cast<Var>(l < 0 ? -l : l); }

/// NNF circuit stored as a DAG in topological order (children before
/// parents). Immutable; build with CircuitBuilder.
class Circuit {
public:
  std::size_t size() const noexcept { return kinds_.size(); }
  NodeId root() const noexcept { return root_; }
  std::size_t num_vars() const noexcept { return num_vars_; }
  /// Number of child edges.
  std::size_t num_edges() const noexcept { return children_.size(); }

  NodeKind kind(NodeId a) const { return kinds_[a]; }
  Lit lit(NodeId a) const { return lits_[a]; }
  std::span<const NodeId> children(NodeId a) const {
    return {children_.data() + offsets_[a], offsets_[a + 1] - offsets_[a]};
  }
  bool is_constant(NodeId a) const {
    return kinds_[a] == NodeKind::False || kinds_[a] == NodeKind::True;
  }
  bool is_leaf(NodeId a) const {
    return kinds_[a] != NodeKind::And && kinds_[a] != NodeKind::Or;
  }

  /// Var(a), indexed by variable id.
  const VarSet &scope(NodeId a) const { return scopes_[a]; }

  bool has_vtree() const noexcept { return vtree_ != nullptr; }
  const Vtree &vtree() const { return *vtree_; }
  const std::shared_ptr<const Vtree> &vtree_ptr() const noexcept {
    return vtree_;
  }
  /// Decomposition vnode d(a); requires a vtree.
  VnodeId dvnode(NodeId a) const { return dvnodes_[a]; }
  /// Vnode named by the originating SDD decision node, or kBottom.
  VnodeId decision_vnode(NodeId a) const { return decision_[a]; }

  /// Evaluates the circuit under a full assignment (index = variable id).
  bool evaluate(const std::vector<bool> &assignment) const;

  /// Same circuit, attached to (another) vtree over a superset of variables.
  Circuit with_vtree(std::shared_ptr<const Vtree> vt) const;

private:
  friend class CircuitBuilder;
  void finalize();

  std::vector<NodeKind> kinds_;
  std::vector<Lit> lits_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<NodeId> children_;
  std::vector<VnodeId> decision_;
  NodeId root_ = 0;
  std::size_t num_vars_ = 0;
  std::vector<VarSet> scopes_;
  std::shared_ptr<const Vtree> vtree_;
  std::vector<VnodeId> dvnodes_;
};

/// Builds circuits bottom-up. Constants and literals are hash-consed;
/// internal nodes are not.
class CircuitBuilder {
public:
  NodeId false_node();
  NodeId true_node();
  NodeId literal(Lit l);
  NodeId and_node(std::span<const NodeId> children);
  NodeId or_node(std::span<const NodeId> children,
                 VnodeId decision = kBottom);
  NodeId and_node(std::initializer_list<NodeId> c) {
    return and_node(std::span<const NodeId>(c.begin(), c.size()));
  }
  NodeId or_node(std::initializer_list<NodeId> c) {
    return or_node(std::span<const NodeId>(c.begin(), c.size()));
  }

  /// Copies the nodes reachable from c's root and returns the copied root.
  /// Decision vnodes are not carried over.
  NodeId import(const Circuit &c);

  std::size_t size() const { return c_.kinds_.size(); }
  NodeKind kind(NodeId a) const { return c_.kinds_[a]; }

  /// Finishes the circuit. `num_vars` defaults to the vtree's variable
  /// count, or the largest variable mentioned when there is no vtree.
  Circuit build(NodeId root, std::shared_ptr<const Vtree> vt = nullptr,
                std::size_t num_vars = 0);

private:
  NodeId push(NodeKind k, Lit l, std::span<const NodeId> children,
              VnodeId decision);

  Circuit c_;
  std::optional<NodeId> false_, true_;
  std::unordered_map<Lit, NodeId> literals_;
};

// ---------------------------------------------------------------------------
// Text format

/// Parses an SDD file. Each decision node becomes an Or over two-child And
/// nodes (prime, sub); the result is not simplified.
Circuit parse_sdd(std::string_view text, std::shared_ptr<const Vtree> vt);

/// Prints a circuit in SDD shape (as produced by parse_sdd or the compiler):
/// every Or node must carry a decision vnode and have (prime, sub) And
/// children. Throws StructureError otherwise.
std::string print_sdd(const Circuit &c);

// ---------------------------------------------------------------------------
// Validation and normalization

enum class Determinism { Verified, Assumed, Refuted };

const char *to_string(Determinism d);

struct ValidationReport {
  bool decomposable = false;
  bool structured = false;
  Determinism deterministic = Determinism::Assumed;
  /// "enumeration" or "construction" or "unchecked".
  std::string basis = "unchecked";
  /// When refuted: an assignment (index = variable id) satisfying two
  /// children of `offending_node`.
  std::vector<bool> counterexample;
  NodeId offending_node = 0;
};

struct ValidateOptions {
  /// Exhaustive determinism check when num_vars <= this bound; 0 disables.
  std::size_t determinism_bound = 20;
  /// Mark determinism as holding by construction (compiled circuits).
  bool deterministic_by_construction = false;
};

ValidationReport validate(const Circuit &c, const ValidateOptions &opt = {});

struct NormalizeOptions {
  /// Drop false children of Or nodes, leaving either a false-free circuit
  /// or the single constant false.
  bool eliminate_false = true;
};

/// Removes constant-scope children, collapses unary nodes and binarizes And
/// nodes along the vtree (children ordered left, right). Only nodes
/// reachable from the root are kept.
Circuit normalize(const Circuit &c, const NormalizeOptions &opt = {});

/// True if every And node has exactly two children, the first under
/// d(a).left and the second under d(a).right, and no constant appears below
/// an internal node.
bool is_engine_ready(const Circuit &c);

/// Structural equality: same nodes in the same order.
bool same_structure(const Circuit &a, const Circuit &b);
/// 64-bit hash of the node structure.
std::uint64_t fingerprint(const Circuit &c);

/// Deepest vnode whose scope contains `vars`, by a brute-force scan.
VnodeId deepest_covering_vnode(const Vtree &vt, const VarSet &vars);

} // namespace wmcvar
