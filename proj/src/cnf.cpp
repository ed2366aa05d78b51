#include "wmcvar/cnf.hpp"

#include "line_scanner.hpp"
#include "wmcvar/error.hpp"

#include <sstream>

namespace wmcvar {

void Cnf::add(std::vector<Lit> clause, std::string tag) {
  for (Lit l : clause)
    if (l == 0 || lit_var(l) > num_vars)
      throw DomainError("clause literal " + std::to_string(l) +
                        " outside the declared variables");
  clauses.push_back(std::move(clause));
  tags.push_back(std::move(tag));
}

bool Cnf::satisfied_by(std::uint64_t a) const {
  for (const auto &cl : clauses) {
    bool sat = false;
    for (Lit l : cl)
      if ((((a >> (lit_var(l) - 1)) & 1) != 0) == (l > 0)) {
        sat = true;
        break;
      }
    if (!sat)
      return false;
  }
  return true;
}

Cnf parse_dimacs(std::string_view text) {
  detail::LineScanner in(text);
  Cnf cnf;
  bool have_header = false;
  std::int64_t declared = 0;
  std::vector<Lit> current;
  while (in.next_line()) {
    if (in.blank_or_comment())
      continue;
    if (!have_header) {
      if (in.token() != "p" || in.token() != "cnf")
        in.fail("expected 'p cnf <vars> <clauses>' header");
      cnf.num_vars = static_cast<std::size_t>(in.nonnegative());
      declared = in.nonnegative();
      in.expect_eol();
      have_header = true;
      continue;
    }
    if (in.line().front() == '%')
      break;
    while (!in.at_eol()) {
      auto v = in.integer();
      if (v == 0) {
        cnf.clauses.push_back(std::move(current));
        cnf.tags.emplace_back();
        current.clear();
        continue;
      }
      if (static_cast<std::size_t>(v < 0 ? -v : v) > cnf.num_vars)
        in.fail("literal " + std::to_string(v) + " exceeds variable count");
      current.push_back(static_cast<Lit>(v));
    }
  }
  if (!have_header)
    throw ParseError("missing 'p cnf' header", in.line_no(), 1);
  if (!current.empty()) {
    cnf.clauses.push_back(std::move(current));
    cnf.tags.emplace_back();
  }
  if (static_cast<std::int64_t>(cnf.clauses.size()) != declared)
    throw ParseError("header declares " + std::to_string(declared) +
                         " clauses, found " +
                         std::to_string(cnf.clauses.size()),
                     in.line_no(), 1);
  return cnf;
}

std::string to_dimacs(const Cnf &cnf) {
  std::ostringstream out;
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto &cl : cnf.clauses) {
    for (Lit l : cl)
      out << l << ' ';
    out << "0\n";
  }
  return out.str();
}

std::vector<std::uint64_t> truth_table(const Circuit &c, std::size_t n) {
  if (n > 30)
    throw DomainError("truth table over more than 30 variables");
  if (c.num_vars() > n)
    throw DomainError("circuit mentions variables beyond n");
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::size_t words = static_cast<std::size_t>((total + 63) / 64);
  std::vector<std::uint64_t> out(words, 0);
  std::vector<std::uint64_t> val(c.size());
  static constexpr std::uint64_t kPattern[6] = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  for (std::size_t wi = 0; wi < words; ++wi) {
    const std::uint64_t base = std::uint64_t{wi} * 64;
    for (NodeId a = 0; a <= c.root(); ++a) {
      switch (c.kind(a)) {
      case NodeKind::False:
        val[a] = 0;
        break;
      case NodeKind::True:
        val[a] = ~std::uint64_t{0};
        break;
      case NodeKind::Literal: {
        Var x = lit_var(c.lit(a));
        std::uint64_t w = x - 1 < 6 ? kPattern[x - 1]
                                    : (((base >> (x - 1)) & 1) ? ~0ull : 0ull);
        val[a] = c.lit(a) > 0 ? w : ~w;
        break;
      }
      case NodeKind::And: {
        std::uint64_t w = ~std::uint64_t{0};
        for (NodeId ch : c.children(a))
          w &= val[ch];
        val[a] = w;
        break;
      }
      case NodeKind::Or: {
        std::uint64_t w = 0;
        for (NodeId ch : c.children(a))
          w |= val[ch];
        val[a] = w;
        break;
      }
      }
    }
    out[wi] = val[c.root()];
  }
  if (total < 64)
    out[0] &= (std::uint64_t{1} << total) - 1;
  return out;
}

} // namespace wmcvar
