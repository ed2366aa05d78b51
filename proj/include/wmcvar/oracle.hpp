#pragma once

#include "wmcvar/circuit.hpp"
#include "wmcvar/cnf.hpp"
#include "wmcvar/scalar.hpp"
#include "wmcvar/weights.hpp"

#include <cstdint>
#include <vector>

namespace wmcvar {

/// Satisfying assignments over variables 1..n; bit (x - 1) holds x.
struct ModelSet {
  std::size_t n = 0;
  std::vector<std::uint64_t> models;

  std::size_t size() const { return models.size(); }
};

inline constexpr std::size_t kDefaultEnumerationBound = 20;

ModelSet enumerate_models(const Circuit &f, std::size_t n,
                          std::size_t bound = kDefaultEnumerationBound);
ModelSet enumerate_models(const Cnf &f,
                          std::size_t bound = kDefaultEnumerationBound);

/// E[W_f] over all n variables.
template <class T> T oracle_exp(const ModelSet &f, const WeightModel &w);
/// Sum over model pairs of Cov(W_a, W_b).
template <class T>
T oracle_cov(const ModelSet &f, const ModelSet &g, const WeightModel &w);
template <class T> T oracle_var(const ModelSet &f, const WeightModel &w) {
  return oracle_cov<T>(f, f, w);
}

/// Moments of single assignments.
template <class T> T assignment_exp(std::uint64_t a, std::size_t n,
                                    const WeightModel &w);
template <class T>
T assignment_cov(std::uint64_t a, std::uint64_t b, std::size_t n,
                 const WeightModel &w);

} // namespace wmcvar
