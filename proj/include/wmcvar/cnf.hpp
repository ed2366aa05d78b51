#pragma once

#include "wmcvar/circuit.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace wmcvar {

struct Cnf {
  std::size_t num_vars = 0;
  std::vector<std::vector<Lit>> clauses;
  /// Optional per-clause label naming the family that produced it.
  std::vector<std::string> tags;

  void add(std::vector<Lit> clause, std::string tag = {});
  bool satisfied_by(std::uint64_t assignment) const;
};

/// DIMACS: "p cnf <vars> <clauses>", clauses terminated by 0, "c" comments.
Cnf parse_dimacs(std::string_view text);
std::string to_dimacs(const Cnf &cnf);

/// 2^n-bit truth table of the circuit over variables 1..n; bit i is the
/// value under the assignment whose bit (x - 1) is variable x.
std::vector<std::uint64_t> truth_table(const Circuit &c, std::size_t n);

} // namespace wmcvar
