#pragma once

// Shared fixtures and random generators for the unit and acceptance tests.

#include "wmcvar/bayes.hpp"
#include "wmcvar/circuit.hpp"
#include "wmcvar/vtree.hpp"
#include "wmcvar/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef WMCVAR_TEST_DATA
#define WMCVAR_TEST_DATA "tests/data"
#endif

namespace wmcvar::testing {

inline std::string read_data(const std::string &name) {
  std::ifstream in(std::string(WMCVAR_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const Vtree> three_model_vtree() {
  return std::make_shared<const Vtree>(parse_vtree(read_data("three_models.vtree")));
}

inline Circuit three_model_circuit() {
  return parse_sdd(read_data("three_models.sdd"), three_model_vtree());
}

/// mu_P = mu, mu_N = 1 - mu, var_P = var_N = s2, cov_PN = -s2.
inline WeightModel symmetric_weights(std::size_t n, double mu, double s2) {
  WeightModel w(n);
  for (Var x = 1; x <= n; ++x)
    w[x] = VarWeights{mu, 1.0 - mu, s2, s2, -s2};
  return w;
}

inline double symmetric_variance(double mu, double s2) {
  const double m2 = mu * mu, m3 = m2 * mu, m4 = m2 * m2, m6 = m4 * m2;
  const double s4 = s2 * s2, s6 = s4 * s2, s8 = s4 * s4;
  return (2 * m2 - 2 * m3 - 2 * m4 + 4 * m6) * s2 +
         (1 - 2 * mu + 2 * m2 + 6 * m4) * s4 + (2 + 4 * m2) * s6 + s8;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 0) {
  return std::abs(a - b) <=
         std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

inline Vtree random_vtree(std::size_t n, std::mt19937_64 &rng) {
  std::vector<Var> order(n);
  std::iota(order.begin(), order.end(), Var{1});
  std::shuffle(order.begin(), order.end(), rng);
  Vtree::Builder b;
  auto rec = [&](auto &&self, std::size_t lo, std::size_t hi) -> VnodeId {
    if (hi - lo == 1)
      return b.leaf(order[lo]);
    std::uniform_int_distribution<std::size_t> cut(lo + 1, hi - 1);
    std::size_t m = cut(rng);
    VnodeId l = self(self, lo, m);
    VnodeId r = self(self, m, hi);
    return b.internal(l, r);
  };
  rec(rec, 0, n);
  return b.build();
}

/// Random structured d-DNNF respecting `vt`. Nodes are shared across the
/// recursion with some probability, constants appear below internal nodes,
/// and decision nodes split on a literal of the left subtree.
class RandomStdDnnf {
public:
  RandomStdDnnf(std::shared_ptr<const Vtree> vt, std::mt19937_64 &rng)
      : vt_(std::move(vt)), rng_(rng), pool_(vt_->num_vnodes() + 1) {}

  Circuit make() {
    CircuitBuilder b;
    b_ = &b;
    for (auto &p : pool_)
      p.clear();
    NodeId r = node(vt_->root(), 0);
    b_ = nullptr;
    return b.build(r, vt_);
  }

private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  Var pick_var(VnodeId v) {
    std::vector<Var> vars;
    const auto &s = vt_->scope(v);
    for (auto i = s.find_first(); i != VarSet::npos; i = s.find_next(i))
      vars.push_back(static_cast<Var>(i));
    return vars[std::uniform_int_distribution<std::size_t>(
        0, vars.size() - 1)(rng_)];
  }

  NodeId node(VnodeId v, int depth) {
    auto &pool = pool_[v];
    if (!pool.empty() && (pool.size() >= 6 || coin(0.3)))
      return pool[std::uniform_int_distribution<std::size_t>(
          0, pool.size() - 1)(rng_)];
    NodeId out = fresh(v, depth);
    pool.push_back(out);
    return out;
  }

  NodeId fresh(VnodeId v, int depth) {
    if (vt_->is_leaf(v)) {
      double u = std::uniform_real_distribution<>(0, 1)(rng_);
      Lit x = static_cast<Lit>(vt_->var(v));
      if (u < 0.4)
        return b_->literal(x);
      if (u < 0.8)
        return b_->literal(-x);
      return u < 0.9 ? b_->true_node() : b_->false_node();
    }
    const VnodeId l = vt_->left(v), r = vt_->right(v);
    double u = std::uniform_real_distribution<>(0, 1)(rng_);
    if (depth > 0 && u < 0.15)
      return node(coin(0.5) ? l : r, depth + 1);
    if (u < 0.35)
      return b_->and_node({node(l, depth + 1), node(r, depth + 1)});
    // Decision on a literal of the left subtree, optionally refined by a
    // second left variable.
    std::vector<NodeId> primes;
    if (vt_->scope(l).count() >= 2 && coin(0.4)) {
      // primes (a & c), (a & -c), -a
      auto sub_l = vt_->left(l), sub_r = vt_->right(l);
      Var xv = pick_var(sub_l), yv = pick_var(sub_r);
      Lit a = static_cast<Lit>(xv), c = static_cast<Lit>(yv);
      primes.push_back(b_->and_node({b_->literal(a), b_->literal(c)}));
      primes.push_back(b_->and_node({b_->literal(a), b_->literal(-c)}));
      primes.push_back(b_->literal(-a));
    } else {
      Lit x = static_cast<Lit>(pick_var(l));
      primes.push_back(b_->literal(x));
      primes.push_back(b_->literal(-x));
    }
    std::vector<NodeId> elems;
    for (NodeId p : primes) {
      if (coin(0.15))
        continue;
      elems.push_back(b_->and_node({p, node(r, depth + 1)}));
    }
    if (elems.empty())
      return b_->false_node();
    return b_->or_node(std::span<const NodeId>(elems));
  }

  std::shared_ptr<const Vtree> vt_;
  std::mt19937_64 &rng_;
  std::vector<std::vector<NodeId>> pool_;
  CircuitBuilder *b_ = nullptr;
};

/// Random weights; each per-variable 2x2 covariance is L L^T for a random
/// lower-triangular L. With `dyadic`, every value is a multiple of 1/8.
inline WeightModel random_weights(std::size_t n, std::mt19937_64 &rng,
                                  bool dyadic = false) {
  WeightModel w(n);
  std::uniform_real_distribution<> mu(0.1, 1.5), sd(-0.6, 0.6);
  auto q = [&](double x) { return dyadic ? std::round(x * 8) / 8 : x; };
  for (Var x = 1; x <= n; ++x) {
    double l11 = q(sd(rng)), l21 = q(sd(rng)), l22 = q(sd(rng));
    w[x] = VarWeights{q(mu(rng)), q(mu(rng)), l11 * l11, l21 * l21 + l22 * l22,
                      l11 * l21};
  }
  return w;
}

/// Random network over n variables with arities in [2, max_arity] and up to
/// max_parents earlier parents each. About one column in ten is
/// deterministic. Moments follow the theta rule.
inline BayesNet random_bn(std::size_t n, std::size_t max_parents,
                          std::size_t max_arity, double theta,
                          std::mt19937_64 &rng) {
  BayesNet bn;
  std::uniform_int_distribution<std::size_t> arity(2, max_arity);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    BnVariable v;
    v.name = "X" + std::to_string(i);
    for (std::size_t j = 0, k = arity(rng); j < k; ++j)
      v.values.push_back("v" + std::to_string(j));
    std::vector<std::size_t> earlier(i);
    std::iota(earlier.begin(), earlier.end(), std::size_t{0});
    std::shuffle(earlier.begin(), earlier.end(), rng);
    std::size_t np = std::uniform_int_distribution<std::size_t>(
        0, std::min(max_parents, i))(rng);
    v.parents.assign(earlier.begin(), earlier.begin() + np);
    std::sort(v.parents.begin(), v.parents.end());
    std::size_t configs = 1;
    for (std::size_t p : v.parents)
      configs *= bn.vars[p].arity();
    for (std::size_t u = 0; u < configs; ++u) {
      std::vector<double> col(v.arity(), 0.0);
      if (std::bernoulli_distribution(0.1)(rng)) {
        col[std::uniform_int_distribution<std::size_t>(0, v.arity() - 1)(rng)] =
            1.0;
      } else {
        double sum = 0.0;
        for (double &p : col)
          sum += p = unit(rng);
        for (double &p : col)
          p /= sum;
      }
      std::vector<std::vector<double>> cov(v.arity(),
                                           std::vector<double>(v.arity()));
      for (std::size_t a = 0; a < v.arity(); ++a)
        for (std::size_t b = 0; b < v.arity(); ++b)
          cov[a][b] = ((a == b ? col[a] : 0.0) - col[a] * col[b]) / theta;
      v.cpt.push_back(std::move(col));
      v.cov.push_back(std::move(cov));
    }
    bn.vars.push_back(std::move(v));
  }
  bn.finalize();
  return bn;
}

/// Random partial assignment observing each variable with probability q.
inline Evidence random_evidence(const BayesNet &bn, double q,
                                std::mt19937_64 &rng) {
  Evidence x = no_evidence(bn);
  for (std::size_t i = 0; i < bn.size(); ++i)
    if (std::bernoulli_distribution(q)(rng))
      x[i] = static_cast<int>(std::uniform_int_distribution<std::size_t>(
          0, bn.vars[i].arity() - 1)(rng));
  return x;
}

} // namespace wmcvar::testing
