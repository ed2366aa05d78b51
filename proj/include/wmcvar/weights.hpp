#pragma once

#include "wmcvar/vtree.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace wmcvar {

/// First and second moments of the weight pair (P_x, N_x).
struct VarWeights {
  double muP = 1.0;
  double muN = 1.0;
  double varP = 0.0;
  double varN = 0.0;
  double covPN = 0.0;
};

/// Variables whose P-weights are jointly distributed. N-weights of members
/// are deterministic.
struct WeightGroup {
  std::vector<Var> members;
  /// cov[i][j] = Cov(P_members[i], P_members[j]).
  std::vector<std::vector<double>> cov;
};

class WeightModel {
public:
  WeightModel() = default;
  /// Model over variables 1..n with default records (mu = 1, no variance).
  explicit WeightModel(std::size_t n) : vars_(n + 1), defined_(n + 1, true) {}

  std::size_t num_vars() const noexcept { return vars_.size() - 1; }
  bool has(Var x) const { return x < vars_.size() && defined_[x]; }
  const VarWeights &operator[](Var x) const { return vars_.at(x); }
  VarWeights &operator[](Var x) { return vars_.at(x); }

  /// Grows the model to n variables; new records are undefined until set.
  void resize(std::size_t n);
  void set(Var x, const VarWeights &w);

  const std::vector<WeightGroup> &groups() const noexcept { return groups_; }
  std::vector<WeightGroup> &groups() noexcept { return groups_; }
  /// Adds a group; sets the members' varP and clears their N-side moments.
  void add_group(WeightGroup g);
  /// Index of the group containing x, or -1.
  int group_of(Var x) const;

  /// Throws WeightError unless every variable 1..n has a record, groups are
  /// disjoint and well formed.
  void check(std::size_t n) const;
  /// Throws WeightError unless every per-variable 2x2 matrix and every
  /// group matrix is positive semidefinite within `tol`.
  void check_psd(double tol = 1e-9) const;

private:
  std::vector<VarWeights> vars_{VarWeights{}};
  std::vector<bool> defined_{false};
  std::vector<WeightGroup> groups_;
};

/// mu = 1, varP = varN = 3, covPN = -1 for every variable.
WeightModel counting_weights(std::size_t n);

/// p(1 - p) / theta, and exactly 0 when p is 0 or 1.
double beta_variance(double p, double theta);

struct DirichletMoments {
  std::vector<double> means;
  std::vector<std::vector<double>> cov;
};

DirichletMoments dirichlet_group_moments(const std::vector<double> &alpha);

/// {"variables": {"<id>": {"muP":..,"muN":..,"varP":..,"varN":..,"covPN":..}},
///  "groups": [{"members": [ids], "cov": [[..]]}]}
WeightModel parse_weights_json(std::string_view text);
std::string weights_to_json(const WeightModel &w);

} // namespace wmcvar
