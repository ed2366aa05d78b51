#pragma once

#include "wmcvar/circuit.hpp"
#include "wmcvar/cnf.hpp"

#include <absl/container/flat_hash_map.h>

#include <memory>
#include <vector>

namespace wmcvar {

/// Handle of a node in an SddManager.
using Sdd = std::uint32_t;

enum class SddOp : std::uint8_t { And, Or };

/// Bottom-up SDD construction over a fixed vtree. Nodes are canonical:
/// decision nodes are compressed and trimmed and kept in a unique table, so
/// equal functions get equal handles.
class SddManager {
public:
  static constexpr Sdd kFalse = 0;
  static constexpr Sdd kTrue = 1;
  static constexpr std::size_t kDefaultNodeLimit = 1'000'000;

  explicit SddManager(std::shared_ptr<const Vtree> vt,
                      std::size_t node_limit = kDefaultNodeLimit);

  const Vtree &vtree() const { return *vt_; }
  const std::shared_ptr<const Vtree> &vtree_ptr() const { return vt_; }
  std::size_t size() const { return nodes_.size(); }

  Sdd literal(Lit l);
  Sdd apply(Sdd a, Sdd b, SddOp op);
  Sdd conjoin(Sdd a, Sdd b) { return apply(a, b, SddOp::And); }
  Sdd disjoin(Sdd a, Sdd b) { return apply(a, b, SddOp::Or); }
  Sdd negate(Sdd a);

  /// Conjunction of the clauses, in ascending depth of each clause's
  /// decomposition vnode. Throws CompileLimitError past the node limit.
  Sdd compile(const Cnf &cnf);

  bool is_decision(Sdd a) const { return nodes_[a].kind == Kind::Decision; }
  /// Vnode of a literal (its leaf) or decision node; kBottom for constants.
  VnodeId vnode(Sdd a) const { return nodes_[a].vnode; }
  struct Element {
    Sdd prime, sub;
  };
  std::span<const Element> elements(Sdd a) const {
    const auto &n = nodes_[a];
    return {elems_.data() + n.begin, n.count};
  }

  /// Decision-shaped circuit: every decision node becomes an Or over
  /// (prime, sub) And nodes, false subs included.
  Circuit to_circuit(Sdd root) const;
  /// Decision nodes reachable from root.
  std::size_t decision_count(Sdd root) const;
  /// Total element count of the reachable decision nodes (the SDD size).
  std::size_t element_count(Sdd root) const;

private:
  enum class Kind : std::uint8_t { False, True, Literal, Decision };
  struct Node {
    Kind kind;
    VnodeId vnode;
    Lit lit;
    std::uint32_t begin, count;
  };

  Sdd make_decision(VnodeId v, std::vector<Element> elems);
  Sdd product(VnodeId v, const std::vector<Element> &a,
              const std::vector<Element> &b, SddOp op);
  std::vector<Element> expand(Sdd a, VnodeId v);
  void check(Sdd a) const;
  std::vector<Sdd> reachable(Sdd root) const;

  std::shared_ptr<const Vtree> vt_;
  std::size_t limit_;
  std::vector<Node> nodes_;
  std::vector<Element> elems_;
  std::vector<Sdd> lit_nodes_;
  absl::flat_hash_map<std::vector<std::uint32_t>, Sdd> unique_;
  absl::flat_hash_map<std::uint64_t, Sdd> and_cache_, or_cache_;
  std::vector<Sdd> neg_cache_;
};

/// Compiles a CNF into a decision-shaped structured d-DNNF respecting vt.
Circuit compile_cnf(const Cnf &cnf, std::shared_ptr<const Vtree> vt,
                    std::size_t node_limit = SddManager::kDefaultNodeLimit);

} // namespace wmcvar
