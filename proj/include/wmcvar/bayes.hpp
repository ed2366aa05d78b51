#pragma once

#include "wmcvar/circuit.hpp"
#include "wmcvar/cnf.hpp"
#include "wmcvar/scalar.hpp"
#include "wmcvar/sdd.hpp"
#include "wmcvar/weights.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wmcvar {

struct BnVariable {
  std::string name;
  std::vector<std::string> values;
  std::vector<std::size_t> parents;
  /// cpt[u][j] = Pr(value j | parent configuration u). Configurations are
  /// mixed-radix over the parents, last parent fastest.
  std::vector<std::vector<double>> cpt;
  /// cov[u] = covariance matrix of the column cpt[u].
  std::vector<std::vector<std::vector<double>>> cov;

  std::size_t arity() const { return values.size(); }
  std::size_t num_configs() const { return cpt.size(); }
};

/// Discrete Bayesian network with per-column parameter uncertainty.
class BayesNet {
public:
  std::vector<BnVariable> vars;

  std::size_t size() const { return vars.size(); }
  std::optional<std::size_t> index(std::string_view name) const;
  bool binary() const;
  /// Parents before children.
  std::vector<std::size_t> topological_order() const;
  /// Configuration index of variable i's parents under a full assignment.
  std::size_t config_of(std::size_t i, const std::vector<std::size_t> &z) const;
  /// "B|A=a0,C=c1", or just "B" for a root.
  std::string column_label(std::size_t i, std::size_t u) const;
  /// "B=b0|A=a0", or "B=b0" for a root.
  std::string parameter_label(std::size_t i, std::size_t u, std::size_t j) const;

  /// Throws DomainError on cycles, bad arities, or columns that do not sum
  /// to one. Zeroes covariance rows of parameters equal to 0 or 1.
  void finalize();
};

/// {"variables": [{"name", "values", "parents", "cpt"}],
///  "uncertainty": {"theta": t} | {"params": {"<col>": {"var": v}},
///                                 "groups": {"<col>": [[..]]}}}
BayesNet parse_bn_json(std::string_view text);
std::string bn_to_json(const BayesNet &bn);

/// Observed value per variable, or -1.
using Evidence = std::vector<int>;
/// {"<var>": "<value>"}; throws EvidenceError on unknown names.
Evidence parse_evidence_json(std::string_view text, const BayesNet &bn);
Evidence no_evidence(const BayesNet &bn);

enum class Encoding : std::uint8_t { Enc1, Enc2 };
enum class MarginalMethod : std::uint8_t { Conjoin, ZeroWeights };
const char *to_string(Encoding e);
const char *to_string(MarginalMethod m);

/// Propositional variable ids of the encoded network.
struct BnLayout {
  Encoding encoding = Encoding::Enc2;
  std::size_t num_vars = 0;
  /// indicator[i][j]
  std::vector<std::vector<Var>> indicator;
  /// param[i][u][j]; one entry per column under ENC2.
  std::vector<std::vector<std::vector<Var>>> param;
};

struct BnEncoding {
  Cnf cnf;
  WeightModel weights;
  BnLayout layout;
};

/// Binary networks only; throws DomainError otherwise.
BnEncoding enc2(const BayesNet &bn);
BnEncoding enc1(const BayesNet &bn);
BnEncoding encode(const BayesNet &bn, Encoding e);
/// Weights of the encoding for the network's current moments.
WeightModel encoding_weights(const BayesNet &bn, const BnLayout &layout);

/// Per variable, in topological order, a chain of parameter blocks ending
/// in the indicator block; chains are joined right-linearly.
Vtree encoding_vtree(const BnLayout &layout, const BayesNet &bn);
/// encoding_vtree of the ENC1 layout.
Vtree column_vtree(const BayesNet &bn);
/// True if every ENC1 column's parameters form exactly one vnode's scope.
bool isolates_columns(const Vtree &vt, const BnLayout &layout);

template <class T> struct Marginal {
  T mean{};
  T variance{};
};

/// An encoded network compiled once to a structured d-DNNF.
class CompiledNetwork {
public:
  CompiledNetwork(BayesNet bn, Encoding e,
                  std::size_t node_limit = SddManager::kDefaultNodeLimit);

  const BayesNet &network() const { return bn_; }
  const BnEncoding &encoding() const { return enc_; }
  const std::shared_ptr<const Vtree> &vtree_ptr() const { return vt_; }
  /// The compiled f, normalized.
  const Circuit &circuit() const { return f_; }
  std::size_t sdd_size() const { return sdd_size_; }

  /// f conjoined with the evidence indicators, normalized.
  Circuit conditioned(const Evidence &x) const;
  /// Encoding weights of `bn` for evidence x; zero_weights clears the
  /// positive weight of every indicator the evidence rules out.
  WeightModel weights(const BayesNet &bn, const Evidence &x,
                      MarginalMethod m) const;
  WeightModel weights(const Evidence &x, MarginalMethod m) const {
    return weights(bn_, x, m);
  }

  template <class T>
  Marginal<T> marginal(const Evidence &x, MarginalMethod m) const;
  /// Pr(x | c) as the ratio of the two marginals and its second-order
  /// variance; both circuits conditioned by conjunction.
  Marginal<double> conditional(const Evidence &x, const Evidence &c) const;

private:
  void check(const Evidence &x) const;

  BayesNet bn_;
  BnEncoding enc_;
  std::shared_ptr<const Vtree> vt_;
  mutable std::unique_ptr<SddManager> mgr_;
  mutable std::mutex mgr_mutex_;
  Sdd root_ = SddManager::kFalse;
  Circuit f_;
  std::size_t sdd_size_ = 0;
};

struct SweepRow {
  std::string parameter;
  double variance = 0.0;
};

struct SweepResult {
  double baseline = 0.0;
  /// Ascending by variance; ties keep parameter order.
  std::vector<SweepRow> rows;
};

/// Every parameter of the encoding (a column under ENC2, a column entry
/// under ENC1) as (variable, configuration, value).
struct ParameterRef {
  std::size_t var, config, value;
};
std::vector<ParameterRef> sweep_parameters(const CompiledNetwork &net);

/// Copy of bn with one parameter's variance multiplied by factor. Under
/// ENC2 the whole column matrix scales by factor; under ENC1 the entry's
/// row and column scale by sqrt(factor).
BayesNet scale_parameter(const BayesNet &bn, Encoding e, const ParameterRef &p,
                         double factor);

/// Marginal variance with each parameter's variance scaled in turn.
SweepResult sensitivity_sweep(const CompiledNetwork &net, const Evidence &x,
                              double factor,
                              MarginalMethod m = MarginalMethod::ZeroWeights,
                              unsigned jobs = 1);

/// Pr(x) by summing the joint distribution over all full assignments.
double bn_exact_marginal(const BayesNet &bn, const Evidence &x);
/// Mean and variance of Pr(x) by pairwise enumeration of full assignments,
/// with columns independent and entries within a column correlated.
Marginal<double> bn_oracle_moments(const BayesNet &bn, const Evidence &x);
/// Cov[Pr(x), Pr(y)] by the same enumeration.
double bn_oracle_covariance(const BayesNet &bn, const Evidence &x,
                            const Evidence &y);

/// Small networks used by tests, the acceptance run, and `bn --demo`.
struct DemoNetwork {
  std::string name;
  std::string json;
};
const std::vector<DemoNetwork> &demo_networks();

extern template Marginal<double>
CompiledNetwork::marginal<double>(const Evidence &, MarginalMethod) const;
extern template Marginal<Rational>
CompiledNetwork::marginal<Rational>(const Evidence &, MarginalMethod) const;

} // namespace wmcvar
