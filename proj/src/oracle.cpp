#include "wmcvar/oracle.hpp"

#include "wmcvar/error.hpp"

#include <bit>

namespace wmcvar {

ModelSet enumerate_models(const Circuit &f, std::size_t n, std::size_t bound) {
  if (n > bound || n > 30)
    throw DomainError("enumeration over " + std::to_string(n) +
                      " variables exceeds the bound of " +
                      std::to_string(bound));
  ModelSet out;
  out.n = n;
  auto tt = truth_table(f, n);
  for (std::size_t wi = 0; wi < tt.size(); ++wi)
    for (std::uint64_t word = tt[wi]; word != 0; word &= word - 1)
      out.models.push_back(std::uint64_t{wi} * 64 +
                           static_cast<unsigned>(std::countr_zero(word)));
  return out;
}

ModelSet enumerate_models(const Cnf &f, std::size_t bound) {
  if (f.num_vars > bound || f.num_vars > 30)
    throw DomainError("enumeration over " + std::to_string(f.num_vars) +
                      " variables exceeds the bound of " +
                      std::to_string(bound));
  ModelSet out;
  out.n = f.num_vars;
  const std::uint64_t total = std::uint64_t{1} << f.num_vars;
  for (std::uint64_t a = 0; a < total; ++a)
    if (f.satisfied_by(a))
      out.models.push_back(a);
  return out;
}

namespace {

template <class T> class PairMoments {
public:
  PairMoments(std::size_t n, const WeightModel &w) : n_(n) {
    w.check(n);
    if (n > 64)
      throw DomainError("oracle supports at most 64 variables");
    std::uint64_t grouped = 0;
    for (const auto &g : w.groups()) {
      Block b;
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        Var x = g.members[i];
        b.mask |= std::uint64_t{1} << (x - 1);
        b.vars.push_back(x);
        b.muP.push_back(from_double<T>(w[x].muP));
        b.muN.push_back(from_double<T>(w[x].muN));
      }
      const std::size_t k = b.vars.size();
      b.m2.assign(k, std::vector<T>(k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          b.m2[i][j] = from_double<T>(g.cov[i][j]) + b.muP[i] * b.muP[j];
      grouped |= b.mask;
      groups_.push_back(std::move(b));
    }
    for (Var x = 1; x <= n; ++x) {
      if ((grouped >> (x - 1)) & 1)
        continue;
      Single s;
      s.bit = x - 1;
      const auto &r = w[x];
      s.mu[1] = from_double<T>(r.muP);
      s.mu[0] = from_double<T>(r.muN);
      s.m2[1][1] = from_double<T>(r.varP) + s.mu[1] * s.mu[1];
      s.m2[0][0] = from_double<T>(r.varN) + s.mu[0] * s.mu[0];
      s.m2[1][0] = s.m2[0][1] = from_double<T>(r.covPN) + s.mu[1] * s.mu[0];
      singles_.push_back(std::move(s));
    }
  }

  T exp(std::uint64_t a) const {
    T e = 1;
    for (const auto &s : singles_)
      e *= s.mu[(a >> s.bit) & 1];
    for (const auto &g : groups_)
      e *= group_exp(g, a);
    return e;
  }

  T cov(std::uint64_t a, std::uint64_t b) const {
    T c = 0, ea = 1, eb = 1;
    auto fold = [&](const T &qa, const T &qb, const T &qab) {
      T blk = qab - qa * qb;
      c = (blk + qa * qb) * c + blk * ea * eb;
      ea *= qa;
      eb *= qb;
    };
    for (const auto &s : singles_) {
      unsigned xa = (a >> s.bit) & 1, xb = (b >> s.bit) & 1;
      fold(s.mu[xa], s.mu[xb], s.m2[xa][xb]);
    }
    for (const auto &g : groups_)
      fold(group_exp(g, a), group_exp(g, b), group_joint(g, a, b));
    return c;
  }

private:
  struct Single {
    unsigned bit = 0;
    T mu[2];
    T m2[2][2];
  };
  struct Block {
    std::uint64_t mask = 0;
    std::vector<Var> vars;
    std::vector<T> muP, muN;
    std::vector<std::vector<T>> m2;
  };

  // Members set true by a, and the product of the others' N-weights.
  void split(const Block &g, std::uint64_t a, std::vector<std::size_t> &on,
             T &nprod) const {
    for (std::size_t i = 0; i < g.vars.size(); ++i) {
      if ((a >> (g.vars[i] - 1)) & 1)
        on.push_back(i);
      else
        nprod *= g.muN[i];
    }
  }

  T p_moment(const Block &g, const std::vector<std::size_t> &on) const {
    switch (on.size()) {
    case 0:
      return T(1);
    case 1:
      return g.muP[on[0]];
    case 2:
      return g.m2[on[0]][on[1]];
    default:
      throw WeightError("oracle: grouped assignment needs parameter moments "
                        "beyond second order");
    }
  }

  T group_exp(const Block &g, std::uint64_t a) const {
    std::vector<std::size_t> on;
    T nprod = 1;
    split(g, a, on, nprod);
    return p_moment(g, on) * nprod;
  }

  T group_joint(const Block &g, std::uint64_t a, std::uint64_t b) const {
    std::vector<std::size_t> on;
    T nprod = 1;
    split(g, a, on, nprod);
    split(g, b, on, nprod);
    return p_moment(g, on) * nprod;
  }

  std::size_t n_;
  std::vector<Single> singles_;
  std::vector<Block> groups_;
};

void check_same_vars(const ModelSet &f, const ModelSet &g) {
  if (f.n != g.n)
    throw DomainError("model sets range over different variable counts");
}

} // namespace

template <class T> T oracle_exp(const ModelSet &f, const WeightModel &w) {
  PairMoments<T> pm(f.n, w);
  T sum = 0;
  for (auto a : f.models)
    sum += pm.exp(a);
  return sum;
}

template <class T>
T oracle_cov(const ModelSet &f, const ModelSet &g, const WeightModel &w) {
  check_same_vars(f, g);
  PairMoments<T> pm(f.n, w);
  T sum = 0;
  for (auto a : f.models)
    for (auto b : g.models)
      sum += pm.cov(a, b);
  return sum;
}

template <class T>
T assignment_exp(std::uint64_t a, std::size_t n, const WeightModel &w) {
  return PairMoments<T>(n, w).exp(a);
}

template <class T>
T assignment_cov(std::uint64_t a, std::uint64_t b, std::size_t n,
                 const WeightModel &w) {
  return PairMoments<T>(n, w).cov(a, b);
}

#define WMCVAR_INSTANTIATE(T)                                                  \
  template T oracle_exp<T>(const ModelSet &, const WeightModel &);             \
  template T oracle_cov<T>(const ModelSet &, const ModelSet &,                 \
                           const WeightModel &);                               \
  template T assignment_exp<T>(std::uint64_t, std::size_t,                     \
                               const WeightModel &);                           \
  template T assignment_cov<T>(std::uint64_t, std::uint64_t, std::size_t,      \
                               const WeightModel &);

WMCVAR_INSTANTIATE(double)
WMCVAR_INSTANTIATE(Rational)

#undef WMCVAR_INSTANTIATE

} // namespace wmcvar
