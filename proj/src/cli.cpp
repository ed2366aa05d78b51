#include "wmcvar/cli.hpp"

#include "wmcvar/bayes.hpp"
#include "wmcvar/circuit.hpp"
#include "wmcvar/cnf.hpp"
#include "wmcvar/error.hpp"
#include "wmcvar/moments.hpp"
#include "wmcvar/reductions.hpp"
#include "wmcvar/sdd.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace wmcvar {
namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Pretty printer with fixed 17-digit floats.
void write_json(std::ostream &os, const ojson &j, int level) {
  const std::string pad(2 * level, ' '), inner(2 * (level + 1), ' ');
  switch (j.type()) {
  case ojson::value_t::object: {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first)
        os << ",\n";
      first = false;
      os << inner << ojson(it.key()).dump() << ": ";
      write_json(os, it.value(), level + 1);
    }
    os << '\n' << pad << '}';
    return;
  }
  case ojson::value_t::array: {
    if (j.empty()) {
      os << "[]";
      return;
    }
    os << "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k)
        os << ",\n";
      os << inner;
      write_json(os, j[k], level + 1);
    }
    os << '\n' << pad << ']';
    return;
  }
  case ojson::value_t::number_float: {
    const double x = j.get<double>();
    os << (std::isfinite(x) ? format_double(x) : "null");
    return;
  }
  default:
    os << j.dump();
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw Error("cannot write " + path);
}

struct Options {
  bool exact = false;
  bool no_timings = false;
  std::size_t determinism_bound = 20;
  std::vector<std::string> files;

  // compile
  std::string vtree_path, shape = "balanced", sdd_out, vtree_out;
  std::size_t node_limit = SddManager::kDefaultNodeLimit;

  // bn
  std::string demo, encoding = "auto", method = "zero", given;
  std::optional<std::string> sweep;
  double factor = 0.1;
  bool csv = false;
  unsigned jobs = 1;
};

class Report {
public:
  Report(const std::string &command, const Options &o)
      : start_(Clock::now()), last_(start_), timings_on_(!o.no_timings) {
    doc_["command"] = command;
    doc_["mode"] = o.exact ? "exact" : "float";
    doc_["inputs"] = ojson::array();
  }

  ojson &doc() { return doc_; }

  std::string input(const std::string &role, const std::string &path) {
    std::string text = read_file(path);
    doc_["inputs"].push_back(
        {{"role", role}, {"path", path}, {"sha256", sha256_hex(text)}});
    return text;
  }

  /// Charges the time since the previous lap to `phase`.
  void lap(const char *phase) {
    auto now = Clock::now();
    times_[phase] +=
        std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

  void finish(std::ostream &out) {
    if (timings_on_) {
      ojson t;
      for (const char *k : {"parse", "validate", "compile", "preprocess", "query"})
        t[k] = times_.count(k) ? times_[k] : 0.0;
      t["total"] =
          std::chrono::duration<double, std::milli>(Clock::now() - start_)
              .count();
      doc_["timings_ms"] = std::move(t);
    }
    write_json(out, doc_, 0);
    out << '\n';
  }

private:
  ojson doc_;
  Clock::time_point start_, last_;
  std::map<std::string, double> times_;
  bool timings_on_;
};

template <class T> void put_number(ojson &doc, const std::string &key, const T &v) {
  doc[key] = ScalarTraits<T>::to_double(v);
  if constexpr (std::is_same_v<T, Rational>)
    doc[key + "_exact"] = v.get_str();
}

ojson big_integer(const mpz_class &z) {
  if (z.fits_ulong_p())
    return ojson(static_cast<std::uint64_t>(z.get_ui()));
  return ojson(z.get_str());
}

std::shared_ptr<const Vtree> load_vtree(Report &r, const std::string &role,
                                        const std::string &path) {
  return std::make_shared<const Vtree>(parse_vtree(r.input(role, path)));
}

Circuit load_circuit(Report &r, const std::string &role, const std::string &path,
                     const std::shared_ptr<const Vtree> &vt) {
  return parse_sdd(r.input(role, path), vt);
}

ojson validation_json(const ValidationReport &v) {
  return {{"decomposable", v.decomposable},
          {"structured", v.structured},
          {"deterministic", to_string(v.deterministic)},
          {"basis", v.basis}};
}

void require_valid(Report &r, const Circuit &c, const std::string &key,
                   const Options &o) {
  ValidateOptions opt;
  opt.determinism_bound = o.determinism_bound;
  auto v = validate(c, opt);
  r.doc()["validation"][key] = validation_json(v);
  if (!v.decomposable)
    throw StructureError(key + " is not decomposable");
  if (!v.structured)
    throw StructureError(key + " does not respect its vtree");
  if (v.deterministic == Determinism::Refuted)
    throw StructureError(key + " is not deterministic (or-node " +
                         std::to_string(v.offending_node) + ")");
}

WeightModel load_weights(Report &r, const std::string &path, std::size_t n) {
  WeightModel w = parse_weights_json(r.input("weights", path));
  w.check(n);
  return w;
}

ojson circuit_json(const Circuit &c) {
  return {{"nodes", c.size()}, {"edges", c.num_edges()}, {"vars", c.num_vars()}};
}

template <class T>
void cmd_moment(Report &r, const Options &o, bool variance) {
  auto vt = load_vtree(r, "vtree", o.files[1]);
  Circuit c = load_circuit(r, "circuit", o.files[0], vt);
  r.lap("parse");
  require_valid(r, c, "circuit", o);
  r.lap("validate");
  WeightModel w = load_weights(r, o.files[2], vt->num_vars());
  r.lap("parse");
  MomentTables<T> t(vt, w);
  MomentSession<T> s(t, {&c});
  r.lap("preprocess");
  T value = variance ? s.variance(0) : s.expectation(0);
  r.lap("query");
  r.doc()["circuit"] = circuit_json(c);
  r.doc()["anchor"] = "all";
  put_number(r.doc(), variance ? "variance" : "expect", value);
}

template <class T> void cmd_covariance(Report &r, const Options &o) {
  auto vf = load_vtree(r, "vtree_f", o.files[1]);
  Circuit f = load_circuit(r, "circuit_f", o.files[0], vf);
  auto vg = load_vtree(r, "vtree_g", o.files[3]);
  Circuit g0 = load_circuit(r, "circuit_g", o.files[2], vg);
  r.lap("parse");
  if (!vf->same_structure(*vg))
    throw VtreeMismatchError("the two circuits use different vtrees");
  require_valid(r, f, "circuit_f", o);
  require_valid(r, g0, "circuit_g", o);
  CircuitBuilder b;
  Circuit g = b.build(b.import(g0), vf, vf->num_vars());
  r.lap("validate");
  WeightModel w = load_weights(r, o.files[4], vf->num_vars());
  r.lap("parse");
  MomentTables<T> t(vf, w);
  const bool swap = fingerprint(g) < fingerprint(f);
  MomentSession<T> s(t, {swap ? &g : &f, swap ? &f : &g});
  r.lap("preprocess");
  T value = s.covariance(0, 1);
  r.lap("query");
  r.doc()["anchor"] = "all";
  put_number(r.doc(), "covariance", value);
}

void cmd_count(Report &r, const Options &o) {
  auto vt = load_vtree(r, "vtree", o.files[1]);
  Circuit c = load_circuit(r, "circuit", o.files[0], vt);
  r.lap("parse");
  auto res = count_via_variance(c, vt->num_vars());
  r.lap("query");
  r.doc()["route"] = to_string(res.route);
  r.doc()["anchor"] = "all";
  r.doc()["count"] = big_integer(res.count);
  r.doc()["variance_exact"] = res.variance.get_str();
  r.doc()["ratio_exact"] = res.ratio.get_str();
}

void cmd_entails(Report &r, const Options &o) {
  auto vt = load_vtree(r, "vtree", o.files[2]);
  Circuit f = load_circuit(r, "circuit_f", o.files[0], vt);
  Circuit g = load_circuit(r, "circuit_g", o.files[1], vt);
  r.lap("parse");
  auto res = entails_via_cov(f, g, vt->num_vars());
  r.lap("query");
  r.doc()["route"] = to_string(res.route);
  r.doc()["anchor"] = "all";
  r.doc()["entails"] = res.entails;
  r.doc()["count_f"] = big_integer(res.count_f);
  r.doc()["count_fg"] = big_integer(res.count_fg);
  r.doc()["variance_f_exact"] = res.var_f.get_str();
  r.doc()["covariance_fg_exact"] = res.cov_fg.get_str();
}

void cmd_ite(Report &r, const Options &o) {
  auto vt = load_vtree(r, "vtree", o.files[2]);
  Circuit f = load_circuit(r, "circuit_f", o.files[0], vt);
  Circuit g = load_circuit(r, "circuit_g", o.files[1], vt);
  WeightModel w = load_weights(r, o.files[3], vt->num_vars());
  r.lap("parse");
  auto res = ite_cov_identity_check(f, g, w, vt->num_vars());
  r.lap("query");
  r.doc()["route"] = to_string(res.route);
  r.doc()["selector"] = res.z;
  r.doc()["anchor"] = "all";
  put_number(r.doc(), "lhs", res.lhs);
  put_number(r.doc(), "rhs", res.rhs);
  put_number(r.doc(), "residual", res.residual);
}

void cmd_compile(Report &r, const Options &o) {
  Cnf cnf = parse_dimacs(r.input("cnf", o.files[0]));
  std::shared_ptr<const Vtree> vt;
  if (!o.vtree_path.empty()) {
    vt = load_vtree(r, "vtree", o.vtree_path);
    if (vt->num_vars() < cnf.num_vars)
      throw VtreeMismatchError("vtree has fewer variables than the cnf");
  } else {
    if (cnf.num_vars == 0)
      throw DomainError("cnf declares no variables");
    std::vector<Var> order(cnf.num_vars);
    std::iota(order.begin(), order.end(), Var{1});
    if (o.shape == "balanced")
      vt = std::make_shared<const Vtree>(Vtree::balanced(order));
    else if (o.shape == "right")
      vt = std::make_shared<const Vtree>(Vtree::right_linear(order));
    else if (o.shape == "left")
      vt = std::make_shared<const Vtree>(Vtree::left_linear(order));
    else
      throw DomainError("unknown vtree shape " + o.shape);
  }
  r.lap("parse");
  SddManager m(vt, o.node_limit);
  Sdd root = m.compile(cnf);
  Circuit c = m.to_circuit(root);
  r.lap("compile");
  ValidateOptions opt;
  opt.determinism_bound = 0;
  opt.deterministic_by_construction = true;
  r.doc()["validation"]["circuit"] = validation_json(validate(c, opt));
  r.lap("validate");
  MomentTables<Rational> t(vt, WeightModel(vt->num_vars()));
  const Rational models = exp_wmc(t, c);
  r.lap("query");
  r.doc()["cnf"] = {{"vars", cnf.num_vars}, {"clauses", cnf.clauses.size()}};
  r.doc()["sdd"] = {{"size", m.element_count(root)},
                    {"decisions", m.decision_count(root)}};
  r.doc()["circuit"] = circuit_json(c);
  r.doc()["anchor"] = "all";
  r.doc()["models"] = big_integer(models.get_num());
  if (!o.sdd_out.empty()) {
    write_file(o.sdd_out, print_sdd(c));
    r.doc()["outputs"]["sdd"] = o.sdd_out;
  }
  if (!o.vtree_out.empty()) {
    write_file(o.vtree_out, print_vtree(*vt));
    r.doc()["outputs"]["vtree"] = o.vtree_out;
  }
}

ojson evidence_json(const BayesNet &bn, const Evidence &x) {
  ojson e = ojson::object();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= 0)
      e[bn.vars[i].name] = bn.vars[i].values[x[i]];
  return e;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"')
      q += '"';
    q += ch;
  }
  return q + '"';
}

void cmd_bn(Report &r, const Options &o, std::ostream &out, bool &printed) {
  std::string text;
  std::size_t next = 0;
  if (!o.demo.empty()) {
    const auto &nets = demo_networks();
    auto it = std::find_if(nets.begin(), nets.end(),
                           [&](const DemoNetwork &d) { return d.name == o.demo; });
    if (it == nets.end())
      throw DomainError("unknown demo network " + o.demo);
    text = it->json;
    r.doc()["inputs"].push_back(
        {{"role", "network"}, {"demo", o.demo}, {"sha256", sha256_hex(text)}});
  } else {
    if (o.files.empty())
      throw DomainError("bn needs a network file or --demo");
    text = r.input("network", o.files[next++]);
  }
  BayesNet bn = parse_bn_json(text);
  Evidence x = no_evidence(bn);
  if (next < o.files.size())
    x = parse_evidence_json(r.input("evidence", o.files[next++]), bn);
  std::optional<Evidence> c;
  if (!o.given.empty())
    c = parse_evidence_json(r.input("given", o.given), bn);
  r.lap("parse");

  Encoding enc;
  if (o.encoding == "auto")
    enc = bn.binary() ? Encoding::Enc2 : Encoding::Enc1;
  else if (o.encoding == "enc1")
    enc = Encoding::Enc1;
  else if (o.encoding == "enc2")
    enc = Encoding::Enc2;
  else
    throw DomainError("unknown encoding " + o.encoding);
  MarginalMethod method;
  if (o.method == "zero" || o.method == "zero_weights")
    method = MarginalMethod::ZeroWeights;
  else if (o.method == "conjoin")
    method = MarginalMethod::Conjoin;
  else
    throw DomainError("unknown method " + o.method);

  CompiledNetwork net(std::move(bn), enc, o.node_limit);
  r.lap("compile");
  const BayesNet &b = net.network();
  auto &d = r.doc();
  d["encoding"] = to_string(enc);
  d["method"] = to_string(method);
  d["evidence"] = evidence_json(b, x);
  d["network"] = {{"variables", b.size()},
                  {"propositional_vars", net.encoding().layout.num_vars},
                  {"clauses", net.encoding().cnf.clauses.size()}};
  d["sdd"] = {{"size", net.sdd_size()}};
  d["circuit"] = circuit_json(net.circuit());

  d["anchor"] = "all";
  if (o.exact) {
    auto m = net.marginal<Rational>(x, method);
    r.lap("query");
    put_number(d, "mean", m.mean);
    put_number(d, "variance", m.variance);
    d["stddev"] = std::sqrt(std::max(0.0, m.variance.get_d()));
  } else {
    auto m = net.marginal<double>(x, method);
    r.lap("query");
    d["mean"] = m.mean;
    d["variance"] = m.variance;
    d["stddev"] = std::sqrt(std::max(0.0, m.variance));
  }
  if (c) {
    auto q = net.conditional(x, *c);
    r.lap("query");
    d["given"] = evidence_json(b, *c);
    d["conditional"] = {{"anchor", "all"},
                        {"mean", q.mean},
                        {"variance_taylor", q.variance}};
  }
  if (o.sweep) {
    double factor = o.factor;
    if (!o.sweep->empty()) {
      try {
        factor = std::stod(*o.sweep);
      } catch (const std::exception &) {
        throw DomainError("bad sweep factor " + *o.sweep);
      }
    }
    auto s = sensitivity_sweep(net, x, factor, method, o.jobs);
    r.lap("query");
    if (o.csv) {
      out << "parameter,variance\n";
      for (const auto &row : s.rows)
        out << csv_field(row.parameter) << ',' << format_double(row.variance)
            << '\n';
      out << "(none)," << format_double(s.baseline) << '\n';
      printed = true;
      return;
    }
    ojson rows = ojson::array();
    for (const auto &row : s.rows)
      rows.push_back({{"parameter", row.parameter}, {"variance", row.variance}});
    rows.push_back({{"parameter", "(none)"}, {"variance", s.baseline}});
    d["sweep"] = {{"factor", factor}, {"anchor", "all"}, {"rows", std::move(rows)}};
  }
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  Options o;
  CLI::App app{"Expectation, variance and covariance of weighted model counts",
               "wmcvar"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--exact", o.exact, "Exact rational arithmetic");
  app.add_flag("--no-timings", o.no_timings, "Omit timings from the report");
  app.add_option("--validate-determinism", o.determinism_bound,
                 "Check determinism exhaustively up to this many variables");

  struct Sub {
    const char *name, *help;
    std::vector<const char *> files;
  };
  const std::vector<Sub> subs = {
      {"expect", "E[W_f] over all variables", {"circuit", "vtree", "weights"}},
      {"variance", "Var[W_f] over all variables", {"circuit", "vtree", "weights"}},
      {"covariance", "Cov[W_f, W_g]",
       {"circuit_f", "vtree_f", "circuit_g", "vtree_g", "weights"}},
      {"count", "Model count by the variance reduction", {"circuit", "vtree"}},
      {"entails", "Entailment f |= g by the covariance reduction",
       {"circuit_f", "circuit_g", "vtree"}},
      {"ite-check", "Check the if-then-else covariance identity",
       {"circuit_f", "circuit_g", "vtree", "weights"}},
      {"compile", "Compile a DIMACS CNF to an SDD", {"cnf"}},
  };
  std::map<std::string, CLI::App *> cmds;
  for (const auto &s : subs) {
    auto *sc = app.add_subcommand(s.name, s.help);
    std::string names;
    for (const char *f : s.files)
      names += std::string(names.empty() ? "" : " ") + f;
    sc->add_option("files", o.files, names)
        ->required()
        ->expected(static_cast<int>(s.files.size()));
    cmds[s.name] = sc;
  }
  auto *compile = cmds["compile"];
  compile->add_option("--vtree", o.vtree_path, "Vtree file to compile against");
  compile->add_option("--shape", o.shape, "balanced, right or left")
      ->check(CLI::IsMember({"balanced", "right", "left"}));
  compile->add_option("-o,--output", o.sdd_out, "Write the SDD here");
  compile->add_option("--vtree-out", o.vtree_out, "Write the vtree here");
  compile->add_option("--node-limit", o.node_limit, "SDD node budget");

  auto *bn = app.add_subcommand("bn", "Marginal mean and variance of a network");
  cmds["bn"] = bn;
  bn->add_option("files", o.files, "network [evidence]")->expected(0, 2);
  bn->add_option("--demo", o.demo, "Use an embedded network");
  bn->add_option("--encoding", o.encoding, "auto, enc1 or enc2")
      ->check(CLI::IsMember({"auto", "enc1", "enc2"}));
  bn->add_option("--method", o.method, "zero or conjoin")
      ->check(CLI::IsMember({"zero", "zero_weights", "conjoin"}));
  bn->add_option("--sweep", o.sweep, "Sensitivity sweep [factor]")
      ->expected(0, 1);
  bn->add_option("--factor", o.factor, "Sweep factor (default 0.1)");
  bn->add_flag("--csv", o.csv, "Sweep table as CSV");
  bn->add_option("--jobs", o.jobs, "Parallel sweep workers")
      ->check(CLI::PositiveNumber);
  bn->add_option("--given", o.given, "Evidence file to condition on");
  bn->add_option("--node-limit", o.node_limit, "SDD node budget");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  std::string name;
  for (const auto &[k, sc] : cmds)
    if (sc->parsed())
      name = k;

  try {
    Report r(name, o);
    bool printed = false;
    if (name == "expect" || name == "variance") {
      const bool var = name == "variance";
      o.exact ? cmd_moment<Rational>(r, o, var) : cmd_moment<double>(r, o, var);
    } else if (name == "covariance") {
      o.exact ? cmd_covariance<Rational>(r, o) : cmd_covariance<double>(r, o);
    } else if (name == "count") {
      cmd_count(r, o);
    } else if (name == "entails") {
      cmd_entails(r, o);
    } else if (name == "ite-check") {
      cmd_ite(r, o);
    } else if (name == "compile") {
      cmd_compile(r, o);
    } else {
      cmd_bn(r, o, out, printed);
    }
    if (!printed)
      r.finish(out);
    return kExitOk;
  } catch (const ParseError &e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const StructureError &e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const WeightError &e) {
    err << "weight error: " << e.what() << '\n';
    return kExitWeights;
  } catch (const VtreeMismatchError &e) {
    err << "vtree mismatch: " << e.what() << '\n';
    return kExitVtreeMismatch;
  } catch (const EvidenceError &e) {
    err << "evidence error: " << e.what() << '\n';
    return kExitEvidence;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

} // namespace wmcvar
