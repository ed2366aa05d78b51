#pragma once

// Executable versions of the hardness constructions: model counting and
// entailment recovered from variance/covariance queries, and the ITE
// covariance identity. For inputs that are not structured these route
// through the enumeration oracle, so they only run at small scale.

#include "wmcvar/circuit.hpp"
#include "wmcvar/scalar.hpp"
#include "wmcvar/weights.hpp"

#include <string>

namespace wmcvar {

enum class Route { Auto, Circuit, Oracle };
const char *to_string(Route r);

struct CountResult {
  mpz_class count;
  /// Var[W_f] under counting weights.
  Rational variance;
  /// variance / (4^n - 1), before the ceiling.
  Rational ratio;
  Route route = Route::Auto;
};

/// |models of f over n variables| = ceil(Var[W_f] / (4^n - 1)).
CountResult count_via_variance(const Circuit &f, std::size_t n,
                               Route route = Route::Auto);

struct EntailResult {
  bool entails = false;
  mpz_class count_f, count_fg;
  Rational var_f, cov_fg;
  Route route = Route::Auto;
};

/// f |= g iff |models(f)| == |models(f & g)|, both counts recovered from
/// Var[W_f] and Cov[W_f, W_g] under counting weights.
EntailResult entails_via_cov(const Circuit &f, const Circuit &g, std::size_t n,
                             Route route = Route::Auto);

struct IteCheck {
  Rational lhs, rhs, residual;
  Route route = Route::Auto;
  /// Variable used as the fresh selector z.
  Var z = 0;
};

/// With h = (z & f) | (-z & g) and z weighted mu = 1, var = 3, cov = -3:
/// Cov(f, g) = Var(f) + Var(g) - Var(h)/4 + 3 (E f - E g)^2 / 4.
/// `z` defaults to n + 1; any z <= n throws DomainError.
IteCheck ite_cov_identity_check(const Circuit &f, const Circuit &g,
                                const WeightModel &w, std::size_t n,
                                Route route = Route::Auto, Var z = 0);

/// True if the circuit can be evaluated by the structured engine over
/// exactly n variables.
bool engine_applicable(const Circuit &f, std::size_t n);

} // namespace wmcvar
