#include "wmcvar/bayes.hpp"

#include "wmcvar/error.hpp"
#include "wmcvar/moments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

namespace wmcvar {

using json = nlohmann::json;

std::optional<std::size_t> BayesNet::index(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name)
      return i;
  return std::nullopt;
}

bool BayesNet::binary() const {
  return std::all_of(vars.begin(), vars.end(),
                     [](const BnVariable &v) { return v.arity() == 2; });
}

std::vector<std::size_t> BayesNet::topological_order() const {
  const std::size_t n = vars.size();
  std::vector<std::size_t> indeg(n, 0), order;
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p : vars[i].parents) {
      children[p].push_back(i);
      ++indeg[i];
    }
  // smallest ready index first, so the order is deterministic
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0)
      ready.insert(i);
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t c : children[i])
      if (--indeg[c] == 0)
        ready.insert(c);
  }
  if (order.size() != n)
    throw DomainError("network has a directed cycle");
  return order;
}

std::size_t BayesNet::config_of(std::size_t i,
                                const std::vector<std::size_t> &z) const {
  std::size_t u = 0;
  for (std::size_t p : vars[i].parents)
    u = u * vars[p].arity() + z[p];
  return u;
}

namespace {

// Parent values of configuration u of variable i.
std::vector<std::size_t> config_values(const BayesNet &bn, std::size_t i,
                                       std::size_t u) {
  const auto &ps = bn.vars[i].parents;
  std::vector<std::size_t> vals(ps.size());
  for (std::size_t k = ps.size(); k-- > 0;) {
    const std::size_t r = bn.vars[ps[k]].arity();
    vals[k] = u % r;
    u /= r;
  }
  return vals;
}

std::string parents_text(const BayesNet &bn, std::size_t i, std::size_t u) {
  const auto &ps = bn.vars[i].parents;
  auto vals = config_values(bn, i, u);
  std::string s;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (k)
      s += ',';
    s += bn.vars[ps[k]].name + '=' + bn.vars[ps[k]].values[vals[k]];
  }
  return s;
}

} // namespace

std::string BayesNet::column_label(std::size_t i, std::size_t u) const {
  if (vars[i].parents.empty())
    return vars[i].name;
  return vars[i].name + '|' + parents_text(*this, i, u);
}

std::string BayesNet::parameter_label(std::size_t i, std::size_t u,
                                      std::size_t j) const {
  std::string s = vars[i].name + '=' + vars[i].values[j];
  if (!vars[i].parents.empty())
    s += '|' + parents_text(*this, i, u);
  return s;
}

void BayesNet::finalize() {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto &v = vars[i];
    const std::size_t k = v.arity();
    if (k < 2)
      throw DomainError("variable " + v.name + " needs at least two values");
    if (std::set<std::string>(v.values.begin(), v.values.end()).size() != k)
      throw DomainError("variable " + v.name + " repeats a value");
    std::size_t configs = 1;
    for (std::size_t p : v.parents) {
      if (p >= vars.size() || p == i)
        throw DomainError("variable " + v.name + " has an invalid parent");
      configs *= vars[p].arity();
    }
    if (v.cpt.size() != configs)
      throw DomainError("cpt of " + v.name + " needs " +
                        std::to_string(configs) + " rows");
    if (v.cov.empty())
      v.cov.assign(configs, std::vector<std::vector<double>>(
                                k, std::vector<double>(k, 0.0)));
    if (v.cov.size() != configs)
      throw DomainError("uncertainty of " + v.name + " has wrong size");
    for (std::size_t u = 0; u < configs; ++u) {
      const auto &col = v.cpt[u];
      if (col.size() != k)
        throw DomainError("cpt row of " + v.name + " has wrong length");
      double sum = 0.0;
      for (double p : col) {
        if (!(p >= 0.0 && p <= 1.0))
          throw DomainError("cpt entry of " + v.name + " outside [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError("cpt column " + column_label(i, u) +
                          " does not sum to 1");
      auto &c = v.cov[u];
      if (c.size() != k)
        throw DomainError("covariance of " + column_label(i, u) +
                          " has wrong size");
      for (std::size_t a = 0; a < k; ++a) {
        if (c[a].size() != k)
          throw DomainError("covariance of " + column_label(i, u) +
                            " has wrong size");
        if (c[a][a] < 0.0)
          throw DomainError("negative variance in " + column_label(i, u));
      }
      for (std::size_t a = 0; a < k; ++a)
        if (col[a] == 0.0 || col[a] == 1.0)
          for (std::size_t b = 0; b < k; ++b)
            c[a][b] = c[b][a] = 0.0;
    }
  }
  topological_order();
}

BayesNet parse_bn_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("network: ") + e.what());
  }
  BayesNet bn;
  try {
    const auto &vs = doc.at("variables");
    std::map<std::string, std::size_t> ids;
    for (const auto &jv : vs) {
      BnVariable v;
      v.name = jv.at("name").get<std::string>();
      if (!ids.emplace(v.name, bn.vars.size()).second)
        throw DomainError("duplicate variable " + v.name);
      v.values = jv.at("values").get<std::vector<std::string>>();
      bn.vars.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
      auto &v = bn.vars[i];
      if (vs[i].contains("parents"))
        for (const auto &p : vs[i]["parents"]) {
          auto it = ids.find(p.get<std::string>());
          if (it == ids.end())
            throw DomainError("unknown parent " + p.get<std::string>() +
                              " of " + v.name);
          v.parents.push_back(it->second);
        }
      v.cpt = vs[i].at("cpt").get<std::vector<std::vector<double>>>();
    }

    std::map<std::string, std::pair<std::size_t, std::size_t>> columns;
    for (std::size_t i = 0; i < bn.size(); ++i) {
      auto &v = bn.vars[i];
      std::size_t configs = 1;
      for (std::size_t p : v.parents)
        configs *= bn.vars[p].arity();
      const std::size_t k = v.arity();
      v.cov.assign(configs, std::vector<std::vector<double>>(
                                k, std::vector<double>(k, 0.0)));
      for (std::size_t u = 0; u < configs; ++u)
        columns[bn.column_label(i, u)] = {i, u};
    }
    auto column = [&](const std::string &label) {
      auto it = columns.find(label);
      if (it == columns.end())
        throw DomainError("unknown cpt column " + label);
      return it->second;
    };

    if (doc.contains("uncertainty")) {
      const auto &un = doc["uncertainty"];
      if (un.contains("theta")) {
        const double theta = un["theta"].get<double>();
        if (!(theta > 1.0))
          throw DomainError("theta must exceed 1");
        for (auto &v : bn.vars)
          for (std::size_t u = 0; u < v.cpt.size() && u < v.cov.size(); ++u) {
            const auto &p = v.cpt[u];
            if (p.size() != v.arity())
              continue;
            for (std::size_t a = 0; a < p.size(); ++a)
              for (std::size_t b = 0; b < p.size(); ++b)
                v.cov[u][a][b] = ((a == b ? p[a] : 0.0) - p[a] * p[b]) / theta;
          }
      }
      if (un.contains("params"))
        for (const auto &[label, spec] : un["params"].items()) {
          auto [i, u] = column(label);
          auto &v = bn.vars[i];
          if (v.arity() != 2)
            throw DomainError("column " + label +
                              " is not binary; give its covariance in groups");
          const double var = spec.at("var").get<double>();
          v.cov[u] = {{var, -var}, {-var, var}};
        }
      if (un.contains("groups"))
        for (const auto &[label, m] : un["groups"].items()) {
          auto [i, u] = column(label);
          bn.vars[i].cov[u] = m.get<std::vector<std::vector<double>>>();
        }
    }
  } catch (const json::exception &e) {
    throw ParseError(std::string("network: ") + e.what());
  }
  bn.finalize();
  return bn;
}

std::string bn_to_json(const BayesNet &bn) {
  nlohmann::ordered_json doc;
  auto &vs = doc["variables"] = nlohmann::ordered_json::array();
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto &v = bn.vars[i];
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    jv["values"] = v.values;
    auto &ps = jv["parents"] = nlohmann::ordered_json::array();
    for (std::size_t p : v.parents)
      ps.push_back(bn.vars[p].name);
    jv["cpt"] = v.cpt;
    vs.push_back(std::move(jv));
    for (std::size_t u = 0; u < v.num_configs(); ++u) {
      bool any = false;
      for (const auto &row : v.cov[u])
        for (double c : row)
          any |= c != 0.0;
      if (any)
        groups[bn.column_label(i, u)] = v.cov[u];
    }
  }
  doc["uncertainty"]["groups"] = std::move(groups);
  return doc.dump(2);
}

Evidence no_evidence(const BayesNet &bn) { return Evidence(bn.size(), -1); }

Evidence parse_evidence_json(std::string_view text, const BayesNet &bn) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("evidence: ") + e.what());
  }
  if (!doc.is_object())
    throw ParseError("evidence must be a JSON object");
  Evidence x = no_evidence(bn);
  for (const auto &[name, val] : doc.items()) {
    auto i = bn.index(name);
    if (!i)
      throw EvidenceError("evidence names unknown variable " + name);
    if (!val.is_string())
      throw EvidenceError("evidence value of " + name + " must be a string");
    const auto &vals = bn.vars[*i].values;
    auto it = std::find(vals.begin(), vals.end(), val.get<std::string>());
    if (it == vals.end())
      throw EvidenceError("variable " + name + " has no value " +
                          val.get<std::string>());
    x[*i] = static_cast<int>(it - vals.begin());
  }
  return x;
}

const char *to_string(Encoding e) { return e == Encoding::Enc1 ? "enc1" : "enc2"; }

const char *to_string(MarginalMethod m) {
  return m == MarginalMethod::Conjoin ? "conjoin" : "zero";
}

namespace {

// Negated indicators of variable i's parent configuration u.
std::vector<Lit> context_negation(const BayesNet &bn, const BnLayout &l,
                                  std::size_t i, std::size_t u) {
  std::vector<Lit> out;
  auto vals = config_values(bn, i, u);
  const auto &ps = bn.vars[i].parents;
  for (std::size_t k = 0; k < ps.size(); ++k)
    out.push_back(-static_cast<Lit>(l.indicator[ps[k]][vals[k]]));
  return out;
}

BnLayout make_layout(const BayesNet &bn, Encoding e) {
  BnLayout l;
  l.encoding = e;
  Var next = 1;
  l.indicator.resize(bn.size());
  l.param.resize(bn.size());
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto &v = bn.vars[i];
    for (std::size_t j = 0; j < v.arity(); ++j)
      l.indicator[i].push_back(next++);
    l.param[i].resize(v.num_configs());
    const std::size_t per = e == Encoding::Enc2 ? 1 : v.arity();
    for (auto &col : l.param[i])
      for (std::size_t j = 0; j < per; ++j)
        col.push_back(next++);
  }
  l.num_vars = next - 1;
  return l;
}

void add_indicator_clauses(Cnf &cnf, const std::vector<Var> &ind) {
  std::vector<Lit> some(ind.begin(), ind.end());
  cnf.add(std::move(some), "indicator");
  for (std::size_t a = 0; a < ind.size(); ++a)
    for (std::size_t b = a + 1; b < ind.size(); ++b)
      cnf.add({-static_cast<Lit>(ind[a]), -static_cast<Lit>(ind[b])},
              "indicator");
}

} // namespace

WeightModel encoding_weights(const BayesNet &bn, const BnLayout &l) {
  WeightModel w(l.num_vars);
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto &v = bn.vars[i];
    for (Var x : l.indicator[i])
      w.set(x, VarWeights{});
    for (std::size_t u = 0; u < v.num_configs(); ++u) {
      const auto &p = v.cpt[u];
      const auto &c = v.cov[u];
      if (l.encoding == Encoding::Enc2) {
        const double s2 = c[0][0];
        w.set(l.param[i][u][0], VarWeights{p[0], 1.0 - p[0], s2, s2, -s2});
        continue;
      }
      WeightGroup g;
      for (std::size_t j = 0; j < v.arity(); ++j) {
        const Var x = l.param[i][u][j];
        w.set(x, VarWeights{p[j], 1.0, 0.0, 0.0, 0.0});
        g.members.push_back(x);
      }
      g.cov = c;
      w.add_group(std::move(g));
    }
  }
  return w;
}

BnEncoding enc2(const BayesNet &bn) {
  if (!bn.binary())
    throw DomainError("enc2 needs every variable to be binary");
  BnEncoding out;
  out.layout = make_layout(bn, Encoding::Enc2);
  const auto &l = out.layout;
  out.cnf.num_vars = l.num_vars;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    add_indicator_clauses(out.cnf, l.indicator[i]);
    const Lit x1 = static_cast<Lit>(l.indicator[i][0]);
    const Lit x2 = static_cast<Lit>(l.indicator[i][1]);
    for (std::size_t u = 0; u < bn.vars[i].num_configs(); ++u) {
      const Lit rho = static_cast<Lit>(l.param[i][u][0]);
      auto pos = context_negation(bn, l, i, u);
      auto neg = pos;
      pos.push_back(-rho);
      pos.push_back(x1);
      neg.push_back(rho);
      neg.push_back(x2);
      out.cnf.add(std::move(pos), "parameter");
      out.cnf.add(std::move(neg), "parameter");
    }
  }
  out.weights = encoding_weights(bn, l);
  return out;
}

BnEncoding enc1(const BayesNet &bn) {
  BnEncoding out;
  out.layout = make_layout(bn, Encoding::Enc1);
  const auto &l = out.layout;
  out.cnf.num_vars = l.num_vars;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    add_indicator_clauses(out.cnf, l.indicator[i]);
    for (std::size_t u = 0; u < bn.vars[i].num_configs(); ++u) {
      const auto ctx = context_negation(bn, l, i, u);
      for (std::size_t j = 0; j < bn.vars[i].arity(); ++j) {
        const Lit theta = static_cast<Lit>(l.param[i][u][j]);
        auto body = ctx;
        body.push_back(-static_cast<Lit>(l.indicator[i][j]));
        auto fwd = body;
        fwd.push_back(theta);
        out.cnf.add(std::move(fwd), "parameter");
        for (Lit c : body)
          out.cnf.add({-theta, -c}, "parameter");
      }
    }
  }
  out.weights = encoding_weights(bn, l);
  return out;
}

BnEncoding encode(const BayesNet &bn, Encoding e) {
  return e == Encoding::Enc1 ? enc1(bn) : enc2(bn);
}

namespace {

VnodeId balanced_block(Vtree::Builder &b, std::span<const Var> xs) {
  if (xs.size() == 1)
    return b.leaf(xs[0]);
  const std::size_t half = xs.size() / 2;
  VnodeId l = balanced_block(b, xs.first(half));
  VnodeId r = balanced_block(b, xs.subspan(half));
  return b.internal(l, r);
}

} // namespace

Vtree encoding_vtree(const BnLayout &l, const BayesNet &bn) {
  Vtree::Builder b;
  std::vector<VnodeId> blocks;
  for (std::size_t i : bn.topological_order()) {
    VnodeId chain = balanced_block(b, l.indicator[i]);
    for (std::size_t u = l.param[i].size(); u-- > 0;)
      chain = b.internal(balanced_block(b, l.param[i][u]), chain);
    blocks.push_back(chain);
  }
  VnodeId spine = blocks.back();
  for (std::size_t k = blocks.size() - 1; k-- > 0;)
    spine = b.internal(blocks[k], spine);
  return b.build();
}

Vtree column_vtree(const BayesNet &bn) {
  return encoding_vtree(make_layout(bn, Encoding::Enc1), bn);
}

bool isolates_columns(const Vtree &vt, const BnLayout &l) {
  for (const auto &cols : l.param)
    for (const auto &col : cols) {
      VnodeId v = kBottom;
      for (Var x : col)
        v = vt.lca(v, vt.leaf_of(x));
      if (vt.scope(v).count() != col.size())
        return false;
    }
  return true;
}

CompiledNetwork::CompiledNetwork(BayesNet bn, Encoding e,
                                 std::size_t node_limit)
    : bn_(std::move(bn)), enc_(encode(bn_, e)) {
  vt_ = std::make_shared<const Vtree>(encoding_vtree(enc_.layout, bn_));
  mgr_ = std::make_unique<SddManager>(vt_, node_limit);
  root_ = mgr_->compile(enc_.cnf);
  sdd_size_ = mgr_->element_count(root_);
  f_ = normalize(mgr_->to_circuit(root_));
}

void CompiledNetwork::check(const Evidence &x) const {
  if (x.size() != bn_.size())
    throw EvidenceError("evidence does not match the network");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < -1 || x[i] >= static_cast<int>(bn_.vars[i].arity()))
      throw EvidenceError("evidence value out of range for " +
                          bn_.vars[i].name);
}

Circuit CompiledNetwork::conditioned(const Evidence &x) const {
  check(x);
  std::lock_guard lock(mgr_mutex_);
  Sdd r = root_;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= 0)
      r = mgr_->conjoin(
          r, mgr_->literal(static_cast<Lit>(enc_.layout.indicator[i][x[i]])));
  return normalize(mgr_->to_circuit(r));
}

WeightModel CompiledNetwork::weights(const BayesNet &bn, const Evidence &x,
                                     MarginalMethod m) const {
  check(x);
  WeightModel w = encoding_weights(bn, enc_.layout);
  if (m == MarginalMethod::ZeroWeights)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] >= 0)
        for (std::size_t j = 0; j < bn.vars[i].arity(); ++j)
          if (static_cast<int>(j) != x[i])
            w[enc_.layout.indicator[i][j]].muP = 0.0;
  return w;
}

template <class T>
Marginal<T> CompiledNetwork::marginal(const Evidence &x,
                                      MarginalMethod m) const {
  const WeightModel w = weights(x, m);
  Circuit c = m == MarginalMethod::Conjoin ? conditioned(x) : f_;
  MomentTables<T> t(vt_, w);
  MomentSession<T> s(t, {&c});
  return {s.expectation(0), s.variance(0)};
}

template Marginal<double>
CompiledNetwork::marginal<double>(const Evidence &, MarginalMethod) const;
template Marginal<Rational>
CompiledNetwork::marginal<Rational>(const Evidence &, MarginalMethod) const;

Marginal<double> CompiledNetwork::conditional(const Evidence &x,
                                              const Evidence &c) const {
  check(x);
  check(c);
  Evidence both = c;
  bool conflict = false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= 0) {
      conflict |= both[i] >= 0 && both[i] != x[i];
      both[i] = x[i];
    }
  Circuit h = conditioned(c);
  Circuit hp;
  if (conflict) {
    CircuitBuilder b;
    hp = b.build(b.false_node(), vt_, vt_->num_vars());
  } else {
    hp = conditioned(both);
  }
  const WeightModel w = weights(c, MarginalMethod::Conjoin);
  MomentTables<double> t(vt_, w);
  MomentSession<double> s(t, {&hp, &h});
  const double eh = s.expectation(1);
  if (std::abs(eh) < 1e-12)
    throw DomainError("conditioning evidence has probability zero");
  return {s.expectation(0) / eh, conditional_var_taylor(t, hp, h)};
}

std::vector<ParameterRef> sweep_parameters(const CompiledNetwork &net) {
  const auto &bn = net.network();
  const bool e1 = net.encoding().layout.encoding == Encoding::Enc1;
  std::vector<ParameterRef> out;
  for (std::size_t i = 0; i < bn.size(); ++i)
    for (std::size_t u = 0; u < bn.vars[i].num_configs(); ++u)
      for (std::size_t j = 0; j < (e1 ? bn.vars[i].arity() : 1); ++j)
        out.push_back({i, u, j});
  return out;
}

BayesNet scale_parameter(const BayesNet &bn, Encoding e, const ParameterRef &p,
                         double factor) {
  if (!(factor > 0.0))
    throw DomainError("sweep factor must be positive");
  BayesNet out = bn;
  auto &c = out.vars.at(p.var).cov.at(p.config);
  if (e == Encoding::Enc2) {
    for (auto &row : c)
      for (double &x : row)
        x *= factor;
    return out;
  }
  const double r = std::sqrt(factor);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == p.value)
      continue;
    c[p.value][k] *= r;
    c[k][p.value] *= r;
  }
  c[p.value][p.value] *= factor;
  return out;
}

SweepResult sensitivity_sweep(const CompiledNetwork &net, const Evidence &x,
                              double factor, MarginalMethod m, unsigned jobs) {
  if (!(factor > 0.0))
    throw DomainError("sweep factor must be positive");
  const auto &bn = net.network();
  const Encoding e = net.encoding().layout.encoding;
  const Circuit c = m == MarginalMethod::Conjoin ? net.conditioned(x)
                                                 : net.circuit();
  auto variance_of = [&](const BayesNet &b) {
    MomentTables<double> t(net.vtree_ptr(), net.weights(b, x, m));
    MomentSession<double> s(t, {&c});
    return s.variance(0);
  };

  SweepResult out;
  out.baseline = variance_of(bn);
  const auto params = sweep_parameters(net);
  out.rows.resize(params.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < params.size();) {
      const auto &p = params[k];
      out.rows[k] = {bn.parameter_label(p.var, p.config, p.value),
                     variance_of(scale_parameter(bn, e, p, factor))};
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(
                                                   std::max<std::size_t>(
                                                       params.size(), 1))));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back(work);
    for (auto &t : pool)
      t.join();
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const SweepRow &a, const SweepRow &b) {
                     return a.variance < b.variance;
                   });
  return out;
}

namespace {

constexpr std::size_t kJointBound = std::size_t{1} << 16;

// Calls fn(z) for every full assignment consistent with x.
template <class Fn>
void for_each_assignment(const BayesNet &bn, const Evidence &x, Fn &&fn) {
  if (x.size() != bn.size())
    throw EvidenceError("evidence does not match the network");
  std::size_t total = 1;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    total *= x[i] >= 0 ? 1 : bn.vars[i].arity();
    if (total > kJointBound)
      throw DomainError("network too large for exhaustive enumeration");
  }
  std::vector<std::size_t> z(bn.size(), 0);
  for (std::size_t i = 0; i < bn.size(); ++i)
    if (x[i] >= 0)
      z[i] = static_cast<std::size_t>(x[i]);
  for (;;) {
    fn(z);
    std::size_t i = 0;
    for (; i < bn.size(); ++i) {
      if (x[i] >= 0)
        continue;
      if (++z[i] < bn.vars[i].arity())
        break;
      z[i] = 0;
    }
    if (i == bn.size())
      return;
  }
}

} // namespace

double bn_exact_marginal(const BayesNet &bn, const Evidence &x) {
  double sum = 0.0;
  for_each_assignment(bn, x, [&](const std::vector<std::size_t> &z) {
    double p = 1.0;
    for (std::size_t i = 0; i < bn.size(); ++i)
      p *= bn.vars[i].cpt[bn.config_of(i, z)][z[i]];
    sum += p;
  });
  return sum;
}

namespace {

struct Term {
  std::vector<std::size_t> u, z;
  double mean;
};

std::vector<Term> joint_terms(const BayesNet &bn, const Evidence &x) {
  std::vector<Term> terms;
  for_each_assignment(bn, x, [&](const std::vector<std::size_t> &z) {
    Term t{std::vector<std::size_t>(bn.size()), z, 1.0};
    for (std::size_t i = 0; i < bn.size(); ++i) {
      t.u[i] = bn.config_of(i, z);
      t.mean *= bn.vars[i].cpt[t.u[i]][z[i]];
    }
    terms.push_back(std::move(t));
  });
  if (terms.size() > 8192)
    throw DomainError("network too large for the pairwise moment oracle");
  return terms;
}

} // namespace

double bn_oracle_covariance(const BayesNet &bn, const Evidence &x,
                            const Evidence &y) {
  const auto tx = joint_terms(bn, x), ty = joint_terms(bn, y);
  double cov = 0.0;
  for (const auto &a : tx)
    for (const auto &b : ty) {
      double full = 1.0;
      for (std::size_t i = 0; i < bn.size(); ++i) {
        const auto &v = bn.vars[i];
        double m = v.cpt[a.u[i]][a.z[i]] * v.cpt[b.u[i]][b.z[i]];
        if (a.u[i] == b.u[i])
          m += v.cov[a.u[i]][a.z[i]][b.z[i]];
        full *= m;
      }
      cov += full - a.mean * b.mean;
    }
  return cov;
}

Marginal<double> bn_oracle_moments(const BayesNet &bn, const Evidence &x) {
  return {bn_exact_marginal(bn, x), bn_oracle_covariance(bn, x, x)};
}

} // namespace wmcvar
