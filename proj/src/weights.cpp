#include "wmcvar/weights.hpp"

#include "wmcvar/error.hpp"
#include "wmcvar/scalar.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <set>

namespace wmcvar {

mpz_class ceil(const Rational &x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

std::string to_string(const Rational &x) { return x.get_str(); }

void WeightModel::resize(std::size_t n) {
  if (n + 1 > vars_.size()) {
    vars_.resize(n + 1);
    defined_.resize(n + 1, false);
  }
}

void WeightModel::set(Var x, const VarWeights &w) {
  if (x == 0)
    throw WeightError("variable ids start at 1");
  resize(x);
  vars_[x] = w;
  defined_[x] = true;
}

void WeightModel::add_group(WeightGroup g) {
  const std::size_t k = g.members.size();
  if (k == 0)
    throw WeightError("empty weight group");
  if (g.cov.size() != k)
    throw WeightError("group covariance has wrong size");
  for (std::size_t i = 0; i < k; ++i) {
    if (g.cov[i].size() != k)
      throw WeightError("group covariance has wrong size");
    Var x = g.members[i];
    if (!has(x))
      throw WeightError("group member " + std::to_string(x) +
                        " has no weight record");
    if (group_of(x) >= 0)
      throw WeightError("variable " + std::to_string(x) +
                        " belongs to two groups");
    for (std::size_t j = 0; j < i; ++j) {
      if (g.members[j] == x)
        throw WeightError("repeated group member");
      if (std::abs(g.cov[i][j] - g.cov[j][i]) >
          1e-12 * std::max(1.0, std::abs(g.cov[i][j])))
        throw WeightError("group covariance is not symmetric");
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    auto &w = vars_[g.members[i]];
    w.varP = g.cov[i][i];
    w.varN = 0.0;
    w.covPN = 0.0;
  }
  groups_.push_back(std::move(g));
}

int WeightModel::group_of(Var x) const {
  for (std::size_t gi = 0; gi < groups_.size(); ++gi)
    for (Var m : groups_[gi].members)
      if (m == x)
        return static_cast<int>(gi);
  return -1;
}

void WeightModel::check(std::size_t n) const {
  for (Var x = 1; x <= n; ++x)
    if (!has(x))
      throw WeightError("no weight record for variable " + std::to_string(x));
  std::set<Var> seen;
  for (const auto &g : groups_)
    for (Var m : g.members) {
      if (m == 0 || m > n)
        throw WeightError("group member " + std::to_string(m) +
                          " outside the variable set");
      if (!seen.insert(m).second)
        throw WeightError("variable " + std::to_string(m) +
                          " belongs to two groups");
      const auto &w = vars_[m];
      if (w.varN != 0.0 || w.covPN != 0.0)
        throw WeightError("group member " + std::to_string(m) +
                          " has a random N-weight");
    }
}

void WeightModel::check_psd(double tol) const {
  for (Var x = 1; x < vars_.size(); ++x) {
    if (!defined_[x] || group_of(x) >= 0)
      continue;
    const auto &w = vars_[x];
    Eigen::Matrix2d m;
    m << w.varP, w.covPN, w.covPN, w.varN;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    if (es.eigenvalues().minCoeff() < -tol)
      throw WeightError("covariance of variable " + std::to_string(x) +
                        " is not positive semidefinite");
  }
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto &g = groups_[gi];
    const auto k = static_cast<Eigen::Index>(g.members.size());
    Eigen::MatrixXd m(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        m(i, j) = g.cov[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() < -tol)
      throw WeightError("covariance of group " + std::to_string(gi) +
                        " is not positive semidefinite");
  }
}

WeightModel counting_weights(std::size_t n) {
  WeightModel w(n);
  for (Var x = 1; x <= n; ++x)
    w[x] = VarWeights{1.0, 1.0, 3.0, 3.0, -1.0};
  return w;
}

double beta_variance(double p, double theta) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("probability outside [0, 1]");
  if (!(theta > 0.0))
    throw DomainError("theta must be positive");
  if (p == 0.0 || p == 1.0)
    return 0.0;
  return p * (1.0 - p) / theta;
}

DirichletMoments dirichlet_group_moments(const std::vector<double> &alpha) {
  if (alpha.size() < 2)
    throw DomainError("a Dirichlet group needs at least two components");
  double a0 = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0))
      throw DomainError("pseudocounts must be positive");
    a0 += a;
  }
  const std::size_t k = alpha.size();
  DirichletMoments out;
  out.means.resize(k);
  out.cov.assign(k, std::vector<double>(k));
  const double denom = a0 * a0 * (a0 + 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    out.means[i] = alpha[i] / a0;
    for (std::size_t j = 0; j < k; ++j)
      out.cov[i][j] = i == j ? alpha[i] * (a0 - alpha[i]) / denom
                             : -alpha[i] * alpha[j] / denom;
  }
  return out;
}

WeightModel parse_weights_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("weights: ") + e.what());
  }
  WeightModel w;
  try {
    if (!doc.is_object())
      throw WeightError("weights: top level must be an object");
    if (doc.contains("variables")) {
      for (const auto &[key, rec] : doc.at("variables").items()) {
        std::size_t pos = 0;
        long id = -1;
        try {
          id = std::stol(key, &pos);
        } catch (const std::exception &) {
        }
        if (id <= 0 || pos != key.size())
          throw WeightError("weights: bad variable id '" + key + "'");
        VarWeights v;
        v.muP = rec.value("muP", 1.0);
        v.muN = rec.value("muN", 1.0);
        v.varP = rec.value("varP", 0.0);
        v.varN = rec.value("varN", 0.0);
        v.covPN = rec.value("covPN", 0.0);
        w.set(static_cast<Var>(id), v);
      }
    }
    if (doc.contains("groups")) {
      for (const auto &g : doc.at("groups")) {
        WeightGroup grp;
        for (const auto &m : g.at("members"))
          grp.members.push_back(m.get<Var>());
        grp.cov = g.at("cov").get<std::vector<std::vector<double>>>();
        w.add_group(std::move(grp));
      }
    }
  } catch (const json::exception &e) {
    throw WeightError(std::string("weights: ") + e.what());
  }
  return w;
}

std::string weights_to_json(const WeightModel &w) {
  nlohmann::ordered_json doc;
  auto &vars = doc["variables"] = nlohmann::ordered_json::object();
  for (Var x = 1; x <= w.num_vars(); ++x) {
    if (!w.has(x))
      continue;
    const auto &r = w[x];
    vars[std::to_string(x)] = {{"muP", r.muP},
                               {"muN", r.muN},
                               {"varP", r.varP},
                               {"varN", r.varN},
                               {"covPN", r.covPN}};
  }
  auto &groups = doc["groups"] = nlohmann::ordered_json::array();
  for (const auto &g : w.groups())
    groups.push_back({{"members", g.members}, {"cov", g.cov}});
  return doc.dump(2) + "\n";
}

} // namespace wmcvar
