#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>

namespace wmcvar {

/// Exact rational scalar.
using Rational = mpq_class;

template <class T> struct ScalarTraits;

template <> struct ScalarTraits<double> {
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static bool is_zero(double x) { return x == 0.0; }
};

template <> struct ScalarTraits<Rational> {
  /// Exact conversion: every finite double is a dyadic rational.
  static Rational from_double(double x) {
    Rational r(x);
    r.canonicalize();
    return r;
  }
  static double to_double(const Rational &x) { return x.get_d(); }
  static bool is_zero(const Rational &x) { return sgn(x) == 0; }
};

template <class T> T from_double(double x) {
  return ScalarTraits<T>::from_double(x);
}
template <class T> double to_double(const T &x) {
  return ScalarTraits<T>::to_double(x);
}

/// Smallest integer >= x.
mpz_class ceil(const Rational &x);

/// "p/q" with q omitted when 1.
std::string to_string(const Rational &x);

} // namespace wmcvar
