#include "support.hpp"

#include "wmcvar/bayes.hpp"
#include "wmcvar/error.hpp"
#include "wmcvar/moments.hpp"
#include "wmcvar/oracle.hpp"

#include <doctest.h>

using namespace wmcvar;

namespace {

BayesNet demo(const std::string &name) {
  for (const auto &d : demo_networks())
    if (d.name == name)
      return parse_bn_json(d.json);
  throw std::runtime_error("no demo " + name);
}

// Every single-variable evidence plus the empty one.
std::vector<Evidence> evidence_sets(const BayesNet &bn) {
  std::vector<Evidence> out{no_evidence(bn)};
  for (std::size_t i = 0; i < bn.size(); ++i)
    for (std::size_t j = 0; j < bn.vars[i].arity(); ++j) {
      auto x = no_evidence(bn);
      x[i] = static_cast<int>(j);
      out.push_back(x);
    }
  return out;
}

BayesNet root_only(std::vector<double> p, std::vector<std::vector<double>> cov) {
  BayesNet bn;
  BnVariable v;
  v.name = "R";
  for (std::size_t j = 0; j < p.size(); ++j)
    v.values.push_back("r" + std::to_string(j));
  v.cpt = {std::move(p)};
  v.cov = {std::move(cov)};
  bn.vars.push_back(std::move(v));
  bn.finalize();
  return bn;
}

} // namespace

TEST_SUITE("bayes") {

TEST_CASE("network json") {
  auto bn = demo("chain2");
  REQUIRE(bn.size() == 2);
  CHECK(bn.vars[1].parents == std::vector<std::size_t>{0});
  CHECK(bn.column_label(1, 1) == "B|A=a1");
  CHECK(bn.parameter_label(1, 0, 1) == "B=b1|A=a0");
  CHECK(bn.vars[0].cov[0][0][0] == doctest::Approx(0.3 * 0.7 / 10));
  CHECK(bn.vars[0].cov[0][0][1] == doctest::Approx(-0.021));

  auto back = parse_bn_json(bn_to_json(bn));
  CHECK(back.vars[1].cpt == bn.vars[1].cpt);
  CHECK(back.vars[1].cov == bn.vars[1].cov);

  auto alarm = demo("alarm");
  CHECK(alarm.vars[2].cov[2][0][0] == 0.02);
  CHECK(alarm.vars[2].cov[2][0][1] == -0.02);
  CHECK(alarm.vars[2].num_configs() == 4);

  CHECK_THROWS_AS(parse_bn_json("{"), ParseError);
  CHECK_THROWS_AS(parse_bn_json(R"({"variables": [{"name": "A"}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_bn_json(R"({"variables": [
    {"name": "A", "values": ["0", "1"], "cpt": [[0.5, 0.6]]}]})"),
                  DomainError);
  CHECK_THROWS_AS(parse_bn_json(R"({"variables": [
    {"name": "A", "values": ["0", "1"], "parents": ["B"], "cpt": [[0.5, 0.5], [1, 0]]},
    {"name": "B", "values": ["0", "1"], "parents": ["A"], "cpt": [[0.5, 0.5], [1, 0]]}]})"),
                  DomainError);
  CHECK_THROWS_AS(parse_bn_json(R"({"variables": [
    {"name": "A", "values": ["0", "1"], "cpt": [[0.5, 0.5]]}],
    "uncertainty": {"params": {"Z": {"var": 0.1}}}})"),
                  DomainError);
}

TEST_CASE("deterministic parameters carry no variance") {
  auto bn = demo("sprinkler");
  // WetGrass | Sprinkler=off, Rain=no is [0, 1]
  const auto &c = bn.vars[3].cov[3];
  CHECK(c[0][0] == 0.0);
  CHECK(c[1][1] == 0.0);
  auto enc = enc2(bn);
  const auto &w = enc.weights[enc.layout.param[3][3][0]];
  CHECK(w.muP == 0.0);
  CHECK(w.varP == 0.0);
  CHECK(w.covPN == 0.0);
  CHECK(beta_variance(0.0, 20) == 0.0);
}

TEST_CASE("evidence json") {
  auto bn = demo("chain2");
  auto x = parse_evidence_json(R"({"B": "b1"})", bn);
  CHECK(x == Evidence{-1, 1});
  CHECK(parse_evidence_json("{}", bn) == no_evidence(bn));
  CHECK_THROWS_AS(parse_evidence_json(R"({"C": "c0"})", bn), EvidenceError);
  CHECK_THROWS_AS(parse_evidence_json(R"({"B": "b7"})", bn), EvidenceError);
  CHECK_THROWS_AS(parse_evidence_json("[1]", bn), ParseError);
}

TEST_CASE("enc2 layout and clauses") {
  auto root = root_only({0.4, 0.6}, {{0.01, -0.01}, {-0.01, 0.01}});
  auto e = enc2(root);
  CHECK(e.layout.num_vars == 3);
  CHECK(e.cnf.clauses.size() == 4);
  const auto &rho = e.weights[e.layout.param[0][0][0]];
  CHECK(rho.muP == 0.4);
  CHECK(rho.muN == doctest::Approx(0.6));
  CHECK(rho.varP == 0.01);
  CHECK(rho.varN == 0.01);
  CHECK(rho.covPN == -0.01);
  const auto &lam = e.weights[e.layout.indicator[0][0]];
  CHECK(lam.muP == 1.0);
  CHECK(lam.varP == 0.0);

  auto alarm = demo("alarm");
  auto ea = enc2(alarm);
  CHECK(ea.layout.param[2].size() == 4);
  CHECK(ea.layout.num_vars == 10 + 1 + 1 + 4 + 2 + 2);
  CHECK(ea.cnf.clauses.size() == 5 * 2 + 2 * 10);

  CHECK_THROWS_AS(enc2(demo("weather")), DomainError);
}

TEST_CASE("enc1 layout, clauses, and groups") {
  auto d = dirichlet_group_moments({1, 1, 1});
  auto root = root_only(d.means, d.cov);
  auto e = enc1(root);
  CHECK(e.layout.num_vars == 6);
  // exactly-one over 3 indicators, then lambda_j <-> theta_j
  CHECK(e.cnf.clauses.size() == 4 + 3 * 2);
  REQUIRE(e.weights.groups().size() == 1);
  const auto &g = e.weights.groups()[0];
  CHECK(g.members == e.layout.param[0][0]);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      CHECK(g.cov[a][b] == doctest::Approx(d.cov[a][b]));
  for (Var th : e.layout.param[0][0]) {
    CHECK(e.weights[th].muN == 1.0);
    CHECK(e.weights[th].varN == 0.0);
    CHECK(e.weights[th].covPN == 0.0);
  }
  // the encoding's models are exactly one (lambda_j, theta_j) pair
  auto models = enumerate_models(e.cnf);
  CHECK(models.size() == 3);
  for (auto a : models.models) {
    for (std::size_t j = 0; j < 3; ++j) {
      const bool lam = (a >> (e.layout.indicator[0][j] - 1)) & 1;
      const bool th = (a >> (e.layout.param[0][0][j] - 1)) & 1;
      CHECK(lam == th);
    }
  }
}

TEST_CASE("column vtree isolates every column") {
  auto bin = root_only({0.5, 0.5}, {{0, 0}, {0, 0}});
  auto vt = column_vtree(bin);
  auto l = enc1(bin).layout;
  CHECK(isolates_columns(vt, l));
  VnodeId g = vt.lca(vt.leaf_of(l.param[0][0][0]), vt.leaf_of(l.param[0][0][1]));
  CHECK(vt.scope(g).count() == 2);
  CHECK(!vt.is_leaf(g));
  CHECK(vt.is_leaf(vt.left(g)));
  CHECK(vt.is_leaf(vt.right(g)));

  // 3-valued child of a binary parent: two 3-leaf groups chained, then Lambda
  BayesNet bn;
  bn.vars.push_back({"P", {"p0", "p1"}, {}, {{0.5, 0.5}}, {}});
  bn.vars.push_back(
      {"C", {"c0", "c1", "c2"}, {0}, {{0.2, 0.3, 0.5}, {0.6, 0.2, 0.2}}, {}});
  bn.finalize();
  auto vt2 = column_vtree(bn);
  auto l2 = enc1(bn).layout;
  CHECK(isolates_columns(vt2, l2));
  auto group_vnode = [&](std::size_t u) {
    VnodeId v = kBottom;
    for (Var x : l2.param[1][u])
      v = vt2.lca(v, vt2.leaf_of(x));
    return v;
  };
  VnodeId g0 = group_vnode(0), g1 = group_vnode(1);
  CHECK(vt2.scope(g0).count() == 3);
  CHECK(vt2.scope(g1).count() == 3);
  VnodeId top = vt2.parent(g0);
  CHECK(vt2.left(top) == g0);
  VnodeId next = vt2.right(top);
  CHECK(vt2.left(next) == g1);
  VnodeId lam = vt2.right(next);
  CHECK(vt2.scope(lam).count() == 3);
  for (Var x : l2.indicator[1])
    CHECK(vt2.scope(lam).test(x));

  // a balanced vtree over the same variables breaks the condition
  std::vector<Var> order(l2.num_vars);
  std::iota(order.begin(), order.end(), Var{1});
  std::swap(order[2], order[5]);
  CHECK_FALSE(isolates_columns(Vtree::right_linear(order), l2));

  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto r = testing::random_bn(1 + t % 5, 2, 3, 10, rng);
    CHECK(isolates_columns(column_vtree(r), enc1(r).layout));
  }
}

TEST_CASE("two-node chain by hand") {
  auto bn = demo("chain2");
  Evidence b1{-1, 1};
  // Pr(b1) = 0.3 * 0.1 + 0.7 * 0.8
  CHECK(bn_exact_marginal(bn, b1) == doctest::Approx(0.59).epsilon(1e-15));
  // Var = Var(q1) + Var(p (q0 - q1)) + 2 E[p] Cov(q1, q0 - q1)
  const double hand = 0.016 + (0.111 * 0.515 - 0.0441) - 2 * 0.3 * 0.016;
  CHECK(bn_oracle_moments(bn, b1).variance == doctest::Approx(hand).epsilon(1e-12));

  CompiledNetwork net(bn, Encoding::Enc2);
  auto m = net.marginal<double>(b1, MarginalMethod::ZeroWeights);
  CHECK(testing::rel_close(m.mean, 0.59, 1e-12));
  CHECK(testing::rel_close(m.variance, hand, 1e-12));

  // and the same against the assignment-level oracle on the CNF itself
  auto w = net.weights(b1, MarginalMethod::ZeroWeights);
  auto models = enumerate_models(net.encoding().cnf);
  CHECK(testing::rel_close(oracle_exp<double>(models, w), 0.59, 1e-12));
  CHECK(testing::rel_close(oracle_var<double>(models, w), hand, 1e-12));
  CHECK(testing::rel_close(exp_wmc(MomentTables<double>(net.vtree_ptr(), w),
                                   net.circuit()),
                           0.59, 1e-12));
}

TEST_CASE("normalization on every demo network") {
  for (const auto &d : demo_networks()) {
    INFO(d.name);
    auto bn = parse_bn_json(d.json);
    std::vector<Encoding> encs{Encoding::Enc1};
    if (bn.binary())
      encs.push_back(Encoding::Enc2);
    for (Encoding e : encs) {
      CompiledNetwork net(bn, e);
      auto rep = validate(net.circuit());
      CHECK(rep.decomposable);
      CHECK(rep.structured);
      for (MarginalMethod m :
           {MarginalMethod::Conjoin, MarginalMethod::ZeroWeights}) {
        auto r = net.marginal<double>(no_evidence(bn), m);
        CHECK(std::abs(r.mean - 1.0) <= 1e-12);
        CHECK(std::abs(r.variance) <= 1e-12);
      }
    }
  }
}

TEST_CASE("methods agree and match the network oracle on demos") {
  for (const auto &d : demo_networks()) {
    auto bn = parse_bn_json(d.json);
    std::vector<Encoding> encs{Encoding::Enc1};
    if (bn.binary())
      encs.push_back(Encoding::Enc2);
    for (Encoding e : encs) {
      CompiledNetwork net(bn, e);
      for (const auto &x : evidence_sets(bn)) {
        INFO(d.name << " " << to_string(e));
        auto a = net.marginal<double>(x, MarginalMethod::Conjoin);
        auto b = net.marginal<double>(x, MarginalMethod::ZeroWeights);
        CHECK(std::abs(a.mean - b.mean) <= 1e-12);
        CHECK(std::abs(a.variance - b.variance) <= 1e-12);
        auto o = bn_oracle_moments(bn, x);
        CHECK(std::abs(b.mean - o.mean) <= 1e-12);
        CHECK(testing::rel_close(b.variance, o.variance, 1e-9, 1e-15));
      }
    }
  }
}

TEST_CASE("random networks: exact inference, oracle, encodings") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 24; ++t) {
    const std::size_t n = 2 + t % 11;
    auto bn = testing::random_bn(n, 2, 2, 8 + t, rng);
    CompiledNetwork n2(bn, Encoding::Enc2), n1(bn, Encoding::Enc1);
    for (int k = 0; k < 3; ++k) {
      auto x = testing::random_evidence(bn, 0.35, rng);
      INFO("network " << t << " evidence " << k);
      const double truth = bn_exact_marginal(bn, x);
      auto a = n2.marginal<double>(x, MarginalMethod::ZeroWeights);
      auto b = n1.marginal<double>(x, MarginalMethod::ZeroWeights);
      auto c = n2.marginal<double>(x, MarginalMethod::Conjoin);
      CHECK(std::abs(a.mean - truth) <= 1e-12);
      CHECK(std::abs(c.mean - truth) <= 1e-12);
      CHECK(std::abs(c.variance - a.variance) <= 1e-12);
      CHECK(testing::rel_close(a.mean, b.mean, 1e-9));
      CHECK(testing::rel_close(a.variance, b.variance, 1e-9, 1e-15));
      if (n <= 9) {
        auto o = bn_oracle_moments(bn, x);
        CHECK(testing::rel_close(a.variance, o.variance, 1e-9, 1e-15));
      }
    }
  }
}

TEST_CASE("multi-valued networks against the oracle") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 16; ++t) {
    auto bn = testing::random_bn(2 + t % 4, 2, 3, 12, rng);
    CompiledNetwork net(bn, Encoding::Enc1);
    for (int k = 0; k < 3; ++k) {
      auto x = testing::random_evidence(bn, 0.4, rng);
      auto o = bn_oracle_moments(bn, x);
      for (MarginalMethod m :
           {MarginalMethod::Conjoin, MarginalMethod::ZeroWeights}) {
        auto r = net.marginal<double>(x, m);
        CHECK(std::abs(r.mean - o.mean) <= 1e-12);
        CHECK(testing::rel_close(r.variance, o.variance, 1e-9, 1e-15));
      }
    }
  }
}

TEST_CASE("exact mode agrees with floating point") {
  auto bn = demo("sprinkler");
  CompiledNetwork net(bn, Encoding::Enc2);
  Evidence x{-1, -1, -1, 0};
  auto d = net.marginal<double>(x, MarginalMethod::ZeroWeights);
  auto q = net.marginal<Rational>(x, MarginalMethod::ZeroWeights);
  CHECK(testing::rel_close(q.mean.get_d(), d.mean, 1e-12));
  CHECK(testing::rel_close(q.variance.get_d(), d.variance, 1e-10));
  CHECK(std::abs(net.marginal<Rational>(no_evidence(bn),
                                        MarginalMethod::ZeroWeights)
                     .mean.get_d() -
                 1.0) <= 1e-15);
  // dyadic tables sum to one exactly, so normalization is exact too
  auto dy = parse_bn_json(R"({"variables": [
    {"name": "A", "values": ["0", "1"], "cpt": [[0.25, 0.75]]},
    {"name": "B", "values": ["0", "1"], "parents": ["A"],
     "cpt": [[0.5, 0.5], [0.125, 0.875]]}], "uncertainty": {"theta": 10}})");
  for (Encoding e : {Encoding::Enc1, Encoding::Enc2}) {
    CompiledNetwork dn(dy, e);
    auto q0 = dn.marginal<Rational>(no_evidence(dy), MarginalMethod::Conjoin);
    CHECK(q0.mean == 1);
    CHECK(q0.variance == 0);
  }
}

TEST_CASE("single uncertain parameter scales linearly") {
  auto bn = demo("chain3");
  for (auto &v : bn.vars)
    for (auto &c : v.cov)
      for (auto &row : c)
        std::fill(row.begin(), row.end(), 0.0);
  bn.vars[1].cov[1] = {{0.03, -0.03}, {-0.03, 0.03}};
  Evidence x{-1, -1, 0};
  for (Encoding e : {Encoding::Enc2, Encoding::Enc1}) {
    CompiledNetwork net(bn, e);
    const double base = net.marginal<double>(x, MarginalMethod::ZeroWeights).variance;
    CHECK(base > 0);
    for (double f : {0.1, 0.25, 0.5}) {
      BayesNet s = bn;
      for (auto &row : s.vars[1].cov[1])
        for (double &c : row)
          c *= f;
      CompiledNetwork ns(s, e);
      CHECK(testing::rel_close(
          ns.marginal<double>(x, MarginalMethod::ZeroWeights).variance,
          f * base, 1e-12));
    }
  }
}

TEST_CASE("sensitivity sweep") {
  auto bn = demo("sprinkler");
  CompiledNetwork net(bn, Encoding::Enc2);
  Evidence x{-1, -1, -1, 0};
  const double base = net.marginal<double>(x, MarginalMethod::ZeroWeights).variance;

  auto same = sensitivity_sweep(net, x, 1.0);
  CHECK(same.baseline == base);
  CHECK(same.rows.size() == 1 + 2 + 2 + 4);
  for (const auto &r : same.rows)
    CHECK(r.variance == doctest::Approx(base).epsilon(1e-12));

  auto s = sensitivity_sweep(net, x, 0.1);
  CHECK(std::is_sorted(s.rows.begin(), s.rows.end(),
                       [](const SweepRow &a, const SweepRow &b) {
                         return a.variance < b.variance;
                       }));
  for (const auto &p : sweep_parameters(net)) {
    const auto label = bn.parameter_label(p.var, p.config, p.value);
    auto it = std::find_if(s.rows.begin(), s.rows.end(),
                           [&](const SweepRow &r) { return r.parameter == label; });
    REQUIRE(it != s.rows.end());
    auto o = bn_oracle_moments(scale_parameter(bn, Encoding::Enc2, p, 0.1), x);
    CHECK(testing::rel_close(it->variance, o.variance, 1e-9));
    if (bn.vars[p.var].cov[p.config][0][0] == 0.0)
      CHECK(it->variance == doctest::Approx(base).epsilon(1e-12));
  }

  auto par = sensitivity_sweep(net, x, 0.1, MarginalMethod::ZeroWeights, 4);
  REQUIRE(par.rows.size() == s.rows.size());
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    CHECK(par.rows[k].parameter == s.rows[k].parameter);
    CHECK(par.rows[k].variance == s.rows[k].variance);
  }
  auto conj = sensitivity_sweep(net, x, 0.1, MarginalMethod::Conjoin);
  for (std::size_t k = 0; k < s.rows.size(); ++k)
    CHECK(std::abs(conj.rows[k].variance - s.rows[k].variance) <= 1e-12);

  CHECK_THROWS_AS(sensitivity_sweep(net, x, 0.0), DomainError);
}

TEST_CASE("grouped sweep scales covariances by the square root") {
  auto bn = demo("weather");
  CompiledNetwork net(bn, Encoding::Enc1);
  Evidence x{-1, -1, 2};
  auto s = sensitivity_sweep(net, x, 0.1);
  CHECK(s.rows.size() == 3 + 3 * 2 + 3 * 3);
  ParameterRef p{0, 0, 1};
  auto scaled = scale_parameter(bn, Encoding::Enc1, p, 0.1);
  const auto &c0 = bn.vars[0].cov[0], &c1 = scaled.vars[0].cov[0];
  CHECK(c1[1][1] == doctest::Approx(0.1 * c0[1][1]));
  CHECK(c1[0][1] == doctest::Approx(std::sqrt(0.1) * c0[0][1]));
  CHECK(c1[1][2] == doctest::Approx(std::sqrt(0.1) * c0[1][2]));
  CHECK(c1[0][2] == c0[0][2]);
  WeightModel w = encoding_weights(scaled, net.encoding().layout);
  CHECK_NOTHROW(w.check_psd());
  auto label = bn.parameter_label(0, 0, 1);
  auto it = std::find_if(s.rows.begin(), s.rows.end(),
                         [&](const SweepRow &r) { return r.parameter == label; });
  REQUIRE(it != s.rows.end());
  CHECK(testing::rel_close(it->variance,
                           bn_oracle_moments(scaled, x).variance, 1e-9));
}

TEST_CASE("conditional probability and its approximate variance") {
  auto bn = demo("alarm");
  CompiledNetwork net(bn, Encoding::Enc2);
  Evidence x = no_evidence(bn), c = no_evidence(bn);
  x[0] = 0; // Burglary = T
  c[3] = 0; // JohnCalls = T
  c[4] = 0; // MaryCalls = T
  auto r = net.conditional(x, c);
  Evidence xc = c;
  xc[0] = 0;
  const double eh = bn_exact_marginal(bn, c), ehp = bn_exact_marginal(bn, xc);
  CHECK(testing::rel_close(r.mean, ehp / eh, 1e-12));
  const double vh = bn_oracle_covariance(bn, c, c);
  const double vhp = bn_oracle_covariance(bn, xc, xc);
  const double chh = bn_oracle_covariance(bn, xc, c);
  const double taylor = vhp / (eh * eh) - 2 * chh * ehp / (eh * eh * eh) +
                        vh * ehp * ehp / (eh * eh * eh * eh);
  CHECK(testing::rel_close(r.variance, taylor, 1e-8));

  Evidence contra = c;
  contra[3] = 1;
  auto z = net.conditional(contra, c);
  CHECK(z.mean == 0.0);
  CHECK(z.variance == 0.0);
}

TEST_CASE("evidence shape is checked") {
  CompiledNetwork net(demo("chain2"), Encoding::Enc2);
  CHECK_THROWS_AS(net.marginal<double>(Evidence{0}, MarginalMethod::Conjoin),
                  EvidenceError);
  CHECK_THROWS_AS(net.marginal<double>(Evidence{0, 5}, MarginalMethod::Conjoin),
                  EvidenceError);
}

} // TEST_SUITE
