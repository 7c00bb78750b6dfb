#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "logiparam/budget.hpp"
#include "logiparam/formula.hpp"

namespace logiparam {

// Literals are non-zero ints, sign = polarity, variables 1-based (DIMACS convention).
using Clause = std::vector<int>;

// Clause set in CNF. add_clause drops tautologies and duplicate literals, so no stored
// clause contains both a literal and its negation and none is empty unless the formula
// really has an empty clause (immediate unsat).
struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
  bool has_empty_clause = false;

  void add_clause(Clause c);
  int fresh_var() { return ++num_vars; }
};

enum class SatStatus { Sat, Unsat, Timeout };

struct SolveStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
};

struct SolveResult {
  SatStatus status = SatStatus::Unsat;
  // 1-based; index 0 unused. Only meaningful when status == Sat.
  std::vector<bool> assignment;
  SolveStats stats;
};

// DPLL with unit propagation and conflict-driven chronological backtracking.
// Branching is deterministic: the unassigned variable with the highest occurrence count
// over the input clauses, ties broken by lowest index, positive polarity first.
// Sat results are re-checked with verify_assignment before being returned.
SolveResult solve(const Cnf& cnf, const Budget& budget = Budget::unlimited());

// Independent verifier pass: true iff every clause has a satisfied literal.
bool verify_assignment(const Cnf& cnf, const std::vector<bool>& assignment);

struct TseitinResult {
  Cnf cnf;
  // Structural map from each distinct subformula to its CNF variable; shared subtrees
  // share a variable. The root variable is asserted as a unit clause.
  std::unordered_map<FormulaPtr, int, FormulaHash, FormulaEq> var_of;
  int root_var = 0;
};

// Tseitin transformation. The input must be purely propositional over
// Atom/Top/Bot/Not/And/Or/Impl; anything else (Iff, modal or quantified nodes) throws
// std::invalid_argument. Output is equisatisfiable with clause count linear in the size.
TseitinResult tseitin(const FormulaPtr& f);

// DIMACS cnf import/export, mainly for debugging against external solvers.
std::string dimacs_export(const Cnf& cnf);
// Throws std::invalid_argument on malformed input.
Cnf dimacs_import(const std::string& text);

}  // namespace logiparam
