#pragma once

#include <unordered_map>
#include <vector>

#include "logiparam/budget.hpp"
#include "logiparam/models.hpp"
#include "logiparam/sat.hpp"

namespace logiparam {

// Bounded model search for the modal logics. A query fixes the number of worlds; the
// theory formulas are asserted at world 0 (the anchor), and when a goal is given its
// negation is asserted there too, so any model found is a countermodel to entailment.
// First-order search runs through grounding instead and lives with the prover.

struct EncodeResult {
  LogicId logic = LogicId::KD;
  int num_worlds = 0;
  Cnf cnf;
  // Truth variable of each (normalized) subformula at each world. World-independent
  // operators reuse one variable across the row.
  std::unordered_map<FormulaPtr, std::vector<int>, FormulaHash, FormulaEq> truth_var;
  std::vector<std::string> atom_names;          // sorted, for deterministic decoding
  std::vector<std::vector<int>> relation_var;   // accessibility (KD) or betterness (DDLE)
  std::vector<std::vector<int>> av_var, pv_var;
  std::vector<std::vector<int>> ob_var;         // ob_var[X][Y], subset bitmask indexed
  std::vector<FormulaPtr> theory;               // normalized inputs, for confirmation
  FormulaPtr goal;                              // normalized, null in consistency mode
};

// goal may be null (pure consistency query). serial only affects KD: switching it off
// drops the every-world-has-a-successor clauses, giving the base K frame.
EncodeResult encode_bounded(LogicId logic, const std::vector<FormulaPtr>& theory,
                            const FormulaPtr& goal, int num_worlds, bool serial = true);

Model decode_model(const EncodeResult& enc, const std::vector<bool>& assignment);

struct BoundedSearchResult {
  SatStatus status = SatStatus::Unsat;
  Model model;      // meaningful only when status == Sat
  bool confirmed = false;  // decoded model re-checked by the evaluator
  SolveStats stats;
};

BoundedSearchResult find_model(LogicId logic, const std::vector<FormulaPtr>& theory,
                               const FormulaPtr& goal, int num_worlds, bool serial,
                               const Budget& budget);

}  // namespace logiparam
