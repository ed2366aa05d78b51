#include "wmcvar/reductions.hpp"

#include "wmcvar/error.hpp"
#include "wmcvar/moments.hpp"
#include "wmcvar/oracle.hpp"

namespace wmcvar {

const char *to_string(Route r) {
  switch (r) {
  case Route::Auto:
    return "auto";
  case Route::Circuit:
    return "circuit";
  case Route::Oracle:
    return "oracle";
  }
  return "?";
}

bool engine_applicable(const Circuit &f, std::size_t n) {
  if (!f.has_vtree() || f.vtree().num_vars() != n)
    return false;
  auto rep = validate(f);
  return rep.decomposable && rep.structured &&
         rep.deterministic != Determinism::Refuted;
}

namespace {

Route resolve(Route r, bool applicable) {
  if (r == Route::Auto)
    return applicable ? Route::Circuit : Route::Oracle;
  if (r == Route::Circuit && !applicable)
    throw StructureError("circuit route needs structured inputs over the "
                         "full variable set");
  return r;
}

Rational four_pow_minus_one(std::size_t n) {
  if (n == 0)
    throw DomainError("the reduction needs at least one variable");
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 4, n);
  return Rational(p - 1);
}

} // namespace

CountResult count_via_variance(const Circuit &f, std::size_t n, Route route) {
  CountResult out;
  out.route = resolve(route, engine_applicable(f, n));
  const auto w = counting_weights(n);
  if (out.route == Route::Circuit) {
    MomentTables<Rational> t(f.vtree_ptr(), w);
    out.variance = var_wmc(t, f);
  } else {
    out.variance = oracle_var<Rational>(enumerate_models(f, n), w);
  }
  out.ratio = out.variance / four_pow_minus_one(n);
  out.ratio.canonicalize();
  out.count = ceil(out.ratio);
  return out;
}

EntailResult entails_via_cov(const Circuit &f, const Circuit &g, std::size_t n,
                             Route route) {
  EntailResult out;
  bool applicable = engine_applicable(f, n) && engine_applicable(g, n) &&
                    f.vtree().same_structure(g.vtree());
  out.route = resolve(route, applicable);
  const auto w = counting_weights(n);
  if (out.route == Route::Circuit) {
    MomentTables<Rational> t(f.vtree_ptr(), w);
    MomentSession<Rational> s(t, {&f, &g});
    out.var_f = s.variance(0);
    out.cov_fg = s.covariance(0, 1);
  } else {
    auto mf = enumerate_models(f, n), mg = enumerate_models(g, n);
    out.var_f = oracle_var<Rational>(mf, w);
    out.cov_fg = oracle_cov<Rational>(mf, mg, w);
  }
  const Rational d = four_pow_minus_one(n);
  out.count_f = ceil(Rational(out.var_f / d));
  out.count_fg = ceil(Rational(out.cov_fg / d));
  out.entails = out.count_f == out.count_fg;
  return out;
}

IteCheck ite_cov_identity_check(const Circuit &f, const Circuit &g,
                                const WeightModel &w, std::size_t n,
                                Route route, Var z) {
  if (z == 0)
    z = static_cast<Var>(n + 1);
  if (z <= n)
    throw DomainError("selector variable " + std::to_string(z) +
                      " collides with the input variables");
  if (z != n + 1)
    throw DomainError("selector variable must be n + 1");
  w.check(n);
  bool applicable = engine_applicable(f, n) && engine_applicable(g, n) &&
                    f.vtree().same_structure(g.vtree());
  IteCheck out;
  out.z = z;
  out.route = resolve(route, applicable);

  WeightModel wz = w;
  wz.set(z, VarWeights{1.0, 1.0, 3.0, 3.0, -3.0});

  Rational cov_fg, var_f, var_g, var_h, e_f, e_g;
  if (out.route == Route::Circuit) {
    MomentTables<Rational> t(f.vtree_ptr(), w);
    MomentSession<Rational> s(t, {&f, &g});
    cov_fg = s.covariance(0, 1);
    var_f = s.variance(0);
    var_g = s.variance(1);
    e_f = s.expectation(0);
    e_g = s.expectation(1);

    Vtree::Builder vb;
    VnodeId zl = vb.leaf(z);
    VnodeId rest = vb.copy(f.vtree());
    vb.internal(zl, rest);
    auto vth = std::make_shared<const Vtree>(vb.build());
    CircuitBuilder b;
    NodeId fr = b.import(f), gr = b.import(g);
    NodeId pos = b.and_node({b.literal(static_cast<Lit>(z)), fr});
    NodeId neg = b.and_node({b.literal(-static_cast<Lit>(z)), gr});
    Circuit h = b.build(b.or_node({pos, neg}), vth);
    MomentTables<Rational> th(vth, wz);
    var_h = var_wmc(th, h);
  } else {
    auto mf = enumerate_models(f, n), mg = enumerate_models(g, n);
    cov_fg = oracle_cov<Rational>(mf, mg, w);
    var_f = oracle_var<Rational>(mf, w);
    var_g = oracle_var<Rational>(mg, w);
    e_f = oracle_exp<Rational>(mf, w);
    e_g = oracle_exp<Rational>(mg, w);
    ModelSet mh{n + 1, {}};
    const std::uint64_t zbit = std::uint64_t{1} << (z - 1);
    for (auto a : mf.models)
      mh.models.push_back(a | zbit);
    for (auto a : mg.models)
      mh.models.push_back(a);
    var_h = oracle_var<Rational>(mh, wz);
  }
  const Rational diff = e_f - e_g;
  out.lhs = cov_fg;
  out.rhs = var_f + var_g - var_h / 4 + 3 * diff * diff / 4;
  out.residual = out.lhs - out.rhs;
  out.lhs.canonicalize();
  out.rhs.canonicalize();
  out.residual.canonicalize();
  return out;
}

} // namespace wmcvar
