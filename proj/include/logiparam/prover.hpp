#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logiparam/budget.hpp"
#include "logiparam/encode.hpp"
#include "logiparam/models.hpp"

namespace logiparam {

// Outcome of a single logical check. Entailed / Refuted / Inconsistent / Consistent are
// definitive; EntailedUpToBound means no countermodel exists within the world bound, which
// is as strong as the bounded logics get here; Unknown means resources ran out first.
enum class Verdict {
  Entailed,
  EntailedUpToBound,
  Refuted,
  Inconsistent,
  Consistent,
  Unknown,
};

const char* verdict_name(Verdict v);

struct Certificate {
  Verdict verdict = Verdict::Unknown;
  bool has_model = false;
  Model model;            // countermodel (Refuted) or witness (Consistent)
  bool bound_limited = false;  // negative answer only explored models up to the bound
  int worlds_checked = 0;
  SolveStats stats;
  std::string detail;
};

struct ProverOptions {
  int max_worlds_kd = 4;
  int max_worlds_ddle = 4;
  int max_worlds_cj = 3;
  std::int64_t check_budget_ms = 5000;

  int max_worlds(LogicId logic) const {
    switch (logic) {
      case LogicId::DDLE: return max_worlds_ddle;
      case LogicId::DDL_CJ: return max_worlds_cj;
      default: return max_worlds_kd;
    }
  }
};

// Direct tableau satisfiability for the serial modal logic; complete, and yields a serial
// countermodel on the open branch. Exposed for cross-checking against the SAT encoding.
enum class SatCheck { Satisfiable, Unsatisfiable, ResourceOut };

struct KdResult {
  SatCheck status = SatCheck::ResourceOut;
  KripkeModel model;  // meaningful when Satisfiable
  SolveStats stats;
};

KdResult kd_satisfiable(const std::vector<FormulaPtr>& formulas, const Budget& budget);

// First-order queries reduce to propositional ones over the constants mentioned in the
// sequent (the domain is exactly those constants; a fallback element is added when there
// are none). Ground predicate instances become atoms like "Loves(a,b)".
struct Grounding {
  std::vector<std::string> domain;
  // ground atom name -> (predicate, element tuple)
  std::map<std::string, std::pair<std::string, std::vector<int>>> pred_atoms;
  std::vector<FormulaPtr> theory;
  FormulaPtr goal;  // null when the query had no goal
};

Grounding ground_sequent(const std::vector<FormulaPtr>& theory, const FormulaPtr& goal);

// Does the theory have a model (with every formula true at the anchor world)?
Certificate check_consistency(LogicId logic, const std::vector<FormulaPtr>& theory,
                              const ProverOptions& opts, const Budget& budget);

// Does the theory entail the goal at the anchor world?
Certificate check_entailment(LogicId logic, const std::vector<FormulaPtr>& theory,
                             const FormulaPtr& goal, const ProverOptions& opts,
                             const Budget& budget);

// One entry of an explanation chain check: step i is checked against the premises plus the
// steps before it, and the hypothesis (index == number of steps) against all of them.
struct StepResult {
  int index = 0;
  bool is_hypothesis = false;
  Certificate cert;
};

struct ChainReport {
  bool all_entailed = false;
  int failed_index = -1;  // index of the first step (or hypothesis) that did not follow
  std::vector<StepResult> steps;
};

ChainReport locate_failed_step(LogicId logic, const std::vector<FormulaPtr>& theory,
                               const std::vector<FormulaPtr>& steps, const FormulaPtr& goal,
                               const ProverOptions& opts, const Budget& budget);

}  // namespace logiparam
