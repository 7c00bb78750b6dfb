#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logiparam/formalizer.hpp"
#include "logiparam/prover.hpp"

namespace logiparam {

// Where a case ends up after the formalize / check / prove / refine loop.
enum class CaseStatus {
  Verified,           // every chain check closed with a definitive Entailed
  VerifiedUpToBound,  // chain closed, but at least one check only up to the world bound
  Failed,             // a step or the hypothesis stayed unprovable through every attempt
  SyntacticError,     // the final formalization attempt did not parse
  Inconsistent,       // the final theory was contradictory (vacuity guard)
  Timeout,            // prover or transport budget ran out
};

const char* case_status_name(CaseStatus s);

// Everything one loop iteration produced, kept verbatim for the trace file.
struct IterationTrace {
  int index = 0;
  bool formalized = false;
  std::vector<std::string> theory;  // surface syntax of the attempt
  std::vector<std::string> steps;
  std::string goal;
  std::string consistency;                // verdict name, empty when never reached
  std::vector<std::string> step_verdicts; // one entry per checked step + hypothesis
  int failed_index = -1;
  bool gave_feedback = false;
  Feedback feedback;
  std::string note;  // syntax / transport / budget detail
};

struct CaseOutcome {
  std::string case_id;
  Domain domain = Domain::Classical;
  LogicId logic = LogicId::KD;
  std::string formalizer;  // kind name
  CaseStatus status = CaseStatus::Failed;
  int iterations_used = 0;     // refinement rounds consumed; 0 = verified on first try
  std::int64_t solving_ms = 0; // prover stages only, not formalization
  std::string error_category;  // parse error category when status == SyntacticError
  std::vector<IterationTrace> trace;
};

struct PipelineOptions {
  int max_refinements = 3;  // the t in "formalize, check, refine up to t times"
  ProverOptions prover;
  std::int64_t case_budget_ms = 60000;
  // Charge solver statistics instead of wall time, so repeated runs report identical
  // solving times. Reports meant to be byte-reproducible need this on.
  bool deterministic_timing = false;
};

// Runs one case through the loop: (i) formalize, (ii) consistency-check theory plus
// steps, (iii) locate the first failing step, (iv) feed the failure back and try again.
// Stops at Verified/VerifiedUpToBound, when refinements are exhausted, or when a budget
// or the transport gives out. Never throws on case-level failures; they become statuses.
CaseOutcome run_case(const ProblemDoc& problem, LogicId logic, Formalizer& formalizer,
                     const PipelineOptions& opts);

// Feedback builders, one per failure shape. The chain variant names the unprovable
// formula, quotes the logic's own failure pattern and appends the countermodel dump.
Feedback feedback_for_chain(LogicId logic, const ChainReport& report,
                            const Formalization& f);
Feedback feedback_for_inconsistency(LogicId logic, const Certificate& cert);
Feedback feedback_for_syntax(const FormalizeSyntaxError& err);

// Structured-text rendering of a full case trace, one block per iteration.
std::string dump_case_outcome(const CaseOutcome& outcome);

}  // namespace logiparam
