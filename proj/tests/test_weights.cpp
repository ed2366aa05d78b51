#include "support.hpp"

#include "wmcvar/error.hpp"
#include "wmcvar/weights.hpp"

#include <doctest.h>

using namespace wmcvar;

TEST_SUITE("weights") {

TEST_CASE("counting weight settings") {
  auto w1 = counting_weights(1);
  REQUIRE(w1.num_vars() == 1);
  CHECK(w1[1].muP == 1.0);
  CHECK(w1[1].muN == 1.0);
  CHECK(w1[1].varP == 3.0);
  CHECK(w1[1].varN == 3.0);
  CHECK(w1[1].covPN == -1.0);
  CHECK(counting_weights(0).num_vars() == 0);
  auto w3 = counting_weights(3);
  CHECK(w3.num_vars() == 3);
  for (Var x = 1; x <= 3; ++x)
    CHECK(w3[x].covPN == -1.0);
  // eigenvalues {2, 4}
  CHECK_NOTHROW(w3.check_psd());
}

TEST_CASE("beta variance") {
  CHECK(beta_variance(0.5, 10) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(beta_variance(0.0, 10) == 0.0);
  CHECK(beta_variance(1.0, 2) == 0.0);
  CHECK_THROWS_AS(beta_variance(1.5, 10), DomainError);
  CHECK_THROWS_AS(beta_variance(-0.1, 10), DomainError);
  CHECK_THROWS_AS(beta_variance(0.5, 0), DomainError);
}

TEST_CASE("dirichlet moments") {
  auto m = dirichlet_group_moments({1.0, 1.0});
  CHECK(m.means[0] == doctest::Approx(0.5));
  CHECK(m.cov[0][0] == doctest::Approx(1.0 / 12));
  CHECK(m.cov[0][1] == doctest::Approx(-1.0 / 12));
  CHECK(m.cov[1][1] == doctest::Approx(-m.cov[0][1]));

  auto sym = dirichlet_group_moments({2.5, 2.5, 2.5});
  CHECK(sym.means[0] == sym.means[1]);
  CHECK(sym.means[1] == sym.means[2]);
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < 3; ++j)
      row += sym.cov[i][j];
    CHECK(std::abs(row) < 1e-15);
  }
  auto asym = dirichlet_group_moments({0.7, 3.1});
  CHECK(asym.cov[0][0] == doctest::Approx(asym.cov[1][1]).epsilon(1e-14));
  CHECK(asym.cov[0][0] == doctest::Approx(-asym.cov[0][1]).epsilon(1e-14));
  CHECK_THROWS_AS(dirichlet_group_moments({1.0}), DomainError);
  CHECK_THROWS_AS(dirichlet_group_moments({1.0, 0.0}), DomainError);
}

TEST_CASE("dirichlet moments against sampling") {
  std::mt19937_64 rng(2024);
  const std::vector<double> alpha{1.0, 1.0};
  auto m = dirichlet_group_moments(alpha);
  const int samples = 1000000;
  std::gamma_distribution<> g0(alpha[0]), g1(alpha[1]);
  double s1 = 0, s11 = 0, s12 = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    double a = g0(rng), b = g1(rng);
    double p1 = a / (a + b), p2 = b / (a + b);
    s1 += p1;
    s2 += p2;
    s11 += p1 * p1;
    s12 += p1 * p2;
  }
  double mean1 = s1 / samples, mean2 = s2 / samples;
  double var1 = s11 / samples - mean1 * mean1;
  double cov12 = s12 / samples - mean1 * mean2;
  // Uniform p1: Var(p1) = 1/12, fourth central moment 1/80.
  double se_mean = std::sqrt(m.cov[0][0] / samples);
  double se_var = std::sqrt((1.0 / 80 - 1.0 / 144) / samples);
  CHECK(std::abs(mean1 - m.means[0]) < 3 * se_mean);
  CHECK(std::abs(var1 - m.cov[0][0]) < 3 * se_var);
  CHECK(std::abs(cov12 - m.cov[0][1]) < 3 * se_var);
}

TEST_CASE("groups") {
  WeightModel w(3);
  w[1] = VarWeights{0.3, 1.0, 0.5, 0.2, 0.1};
  w[2] = VarWeights{0.7, 1.0, 0, 0, 0};
  auto dm = dirichlet_group_moments({3.0, 7.0});
  w.add_group({{1, 2}, dm.cov});
  CHECK(w.group_of(1) == 0);
  CHECK(w.group_of(2) == 0);
  CHECK(w.group_of(3) == -1);
  CHECK(w[1].varP == dm.cov[0][0]);
  CHECK(w[1].varN == 0.0);
  CHECK(w[1].covPN == 0.0);
  CHECK_NOTHROW(w.check(3));
  CHECK_NOTHROW(w.check_psd());
  CHECK_THROWS_AS(w.add_group({{2, 3}, {{1, 0}, {0, 1}}}), WeightError);
  CHECK_THROWS_AS(w.add_group({{3}, {{1, 2}}}), WeightError);

  WeightModel bad(2);
  CHECK_THROWS_AS(bad.add_group({{1, 2}, {{1, 0.5}, {0.2, 1}}}), WeightError);
  WeightModel neg(2);
  neg.add_group({{1, 2}, {{1, 2}, {2, 1}}});
  CHECK_THROWS_AS(neg.check_psd(), WeightError);
}

TEST_CASE("psd check per variable") {
  WeightModel w(1);
  w[1] = VarWeights{1, 1, 1, 1, 2};
  CHECK_THROWS_AS(w.check_psd(), WeightError);
  w[1].covPN = -1;
  CHECK_NOTHROW(w.check_psd());
}

TEST_CASE("missing records") {
  WeightModel w;
  w.set(1, VarWeights{});
  w.set(3, VarWeights{});
  CHECK_THROWS_AS(w.check(3), WeightError);
  CHECK_NOTHROW(w.check(1));
}

TEST_CASE("json round trip and defaults") {
  auto w = parse_weights_json(
      R"({"variables": {"1": {"muP": 0.25, "varP": 0.5}, "2": {}},
          "groups": []})");
  CHECK(w[1].muP == 0.25);
  CHECK(w[1].muN == 1.0);
  CHECK(w[1].varP == 0.5);
  CHECK(w[2].muP == 1.0);
  auto back = parse_weights_json(weights_to_json(w));
  CHECK(back[1].varP == 0.5);
  CHECK(weights_to_json(back) == weights_to_json(w));

  auto g = parse_weights_json(
      R"({"variables": {"1": {"muP": 0.5, "muN": 1}, "2": {"muP": 0.5, "muN": 1}},
          "groups": [{"members": [1, 2], "cov": [[0.1, -0.1], [-0.1, 0.1]]}]})");
  CHECK(g.groups().size() == 1);
  CHECK(g.group_of(2) == 0);

  CHECK_THROWS_AS(parse_weights_json("{"), ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"variables": {"x": {}}})"),
                  WeightError);
  CHECK_THROWS_AS(parse_weights_json(R"({"variables": {"0": {}}})"),
                  WeightError);
  CHECK_THROWS_AS(parse_weights_json(R"({"variables": {"1": {"muP": "a"}}})"),
                  WeightError);
}

} // TEST_SUITE
