#include "logiparam/pipeline.hpp"

#include <chrono>
#include <sstream>

namespace logiparam {

const char* case_status_name(CaseStatus s) {
  switch (s) {
    case CaseStatus::Verified: return "Verified";
    case CaseStatus::VerifiedUpToBound: return "VerifiedUpToBound";
    case CaseStatus::Failed: return "Failed";
    case CaseStatus::SyntacticError: return "SyntacticError";
    case CaseStatus::Inconsistent: return "Inconsistent";
    case CaseStatus::Timeout: return "Timeout";
  }
  return "?";
}

namespace {

// The logic-specific failure pattern quoted in refinement guidance. FOL failures read as
// missing premises, KD failures as modal-axiom gaps, and the conditional logics report
// norms that would not detach.
std::string failure_pattern(LogicId logic, const std::string& formula) {
  switch (logic) {
    case LogicId::FOL:
      return "Missing premise: '" + formula +
             "' does not follow from the theory and the steps before it. Add the bridging "
             "premise that licenses it.";
    case LogicId::KD:
      return "Modal Axiom not satisfied: '" + formula +
             "' is not derivable in the serial modal logic from what precedes it. Supply "
             "the missing fact or a bridge of the shape p -> O(q).";
    case LogicId::DDLE:
      return "Conditional norm not detachable: '" + formula +
             "' cannot be detached from the conditional obligations available here. Add "
             "the missing conditional norm or the premise that triggers it.";
    case LogicId::DDL_CJ:
      return "Conditional norm not detachable: '" + formula +
             "' cannot be detached into an actual obligation in the current context. Add "
             "the missing conditional norm or the context facts that trigger it.";
  }
  return "unprovable: '" + formula + "'";
}

// Deterministic stand-in for wall time: charge each certificate a fixed overhead plus
// its solver work, so identical runs report identical solving times.
std::uint64_t stat_cost(const SolveStats& stats) {
  return 64 + 8 * stats.decisions + 8 * stats.conflicts + stats.propagations;
}

class SolveClock {
 public:
  explicit SolveClock(bool deterministic) : deterministic_(deterministic) {}

  template <typename Fn>
  auto timed(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    wall_ms_ += std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    return result;
  }

  void charge(const SolveStats& stats) { work_ += stat_cost(stats); }

  std::int64_t total_ms() const {
    return deterministic_ ? static_cast<std::int64_t>(work_ / 64) : wall_ms_;
  }

 private:
  bool deterministic_;
  std::int64_t wall_ms_ = 0;
  std::uint64_t work_ = 0;
};

}  // namespace

Feedback feedback_for_chain(LogicId logic, const ChainReport& report,
                            const Formalization& f) {
  Feedback fb;
  fb.kind = FeedbackKind::MissingBridge;
  fb.failed_index = report.failed_index;
  const StepResult& failed = report.steps.back();
  const FormulaPtr& formula =
      failed.is_hypothesis ? f.goal : f.steps[static_cast<size_t>(failed.index)];
  fb.failed_formula = pretty(formula);
  if (failed.cert.has_model) fb.countermodel = dump_model(failed.cert.model);
  std::ostringstream out;
  out << failure_pattern(logic, fb.failed_formula);
  if (failed.is_hypothesis)
    out << " (the hypothesis itself is the first unprovable entry)";
  else
    out << " (explanation step " << failed.index + 1 << " is the first unprovable entry)";
  if (!fb.countermodel.empty()) out << "\nCounterexample:\n" << fb.countermodel;
  fb.guidance = out.str();
  return fb;
}

Feedback feedback_for_inconsistency(LogicId logic, const Certificate& cert) {
  Feedback fb;
  fb.kind = FeedbackKind::Inconsistency;
  std::ostringstream out;
  out << "The formalized theory is contradictory under " << logic_name(logic);
  if (!cert.detail.empty()) out << " (" << cert.detail << ")";
  out << "; any entailment from it would be vacuous. Weaken or drop one of the "
         "conflicting formulas.";
  fb.guidance = out.str();
  return fb;
}

Feedback feedback_for_syntax(const FormalizeSyntaxError& err) {
  Feedback fb;
  fb.kind = FeedbackKind::Syntax;
  std::ostringstream out;
  out << "The attempt did not parse. " << err.field << ": " << err.error.message << " ("
      << parse_error_category_name(err.error.category) << ", bytes " << err.error.begin
      << ".." << err.error.end << ") in '" << err.source
      << "'. Re-emit the formalization in the surface grammar.";
  fb.guidance = out.str();
  return fb;
}

CaseOutcome run_case(const ProblemDoc& problem, LogicId logic, Formalizer& formalizer,
                     const PipelineOptions& opts) {
  CaseOutcome out;
  out.case_id = problem.id;
  out.domain = problem.domain;
  out.logic = logic;
  out.formalizer = formalizer_kind_name(formalizer.kind());

  const Budget case_budget = opts.case_budget_ms > 0 ? Budget::from_ms(opts.case_budget_ms)
                                                     : Budget::unlimited();
  SolveClock clock(opts.deterministic_timing);
  std::optional<Feedback> feedback;

  for (int attempt = 0; attempt <= opts.max_refinements; ++attempt) {
    IterationTrace it;
    it.index = attempt;
    out.iterations_used = attempt;

    FormalizeResult fr = formalizer.run(problem, logic, feedback ? &*feedback : nullptr);

    if (const auto* transport = std::get_if<FormalizeTransportError>(&fr)) {
      it.note = transport->detail;
      out.status = CaseStatus::Timeout;
      out.trace.push_back(std::move(it));
      break;
    }
    if (const auto* syntax = std::get_if<FormalizeSyntaxError>(&fr)) {
      it.note = syntax->field + ": " + syntax->error.message;
      out.status = CaseStatus::SyntacticError;
      out.error_category = parse_error_category_name(syntax->error.category);
      feedback = feedback_for_syntax(*syntax);
      it.gave_feedback = true;
      it.feedback = *feedback;
      out.trace.push_back(std::move(it));
      continue;
    }

    const Formalization& f = std::get<Formalization>(fr);
    it.formalized = true;
    out.error_category.clear();
    for (const auto& p : f.theory) it.theory.push_back(pretty(p));
    for (const auto& p : f.steps) it.steps.push_back(pretty(p));
    it.goal = pretty(f.goal);

    // Stage (ii): the vacuity guard. A contradictory theory must never let a case count
    // as verified, so the consistency verdict gates the chain check.
    std::vector<FormulaPtr> assertions = f.theory;
    assertions.insert(assertions.end(), f.steps.begin(), f.steps.end());
    const Certificate consistency = clock.timed([&] {
      return check_consistency(logic, assertions, opts.prover, case_budget);
    });
    clock.charge(consistency.stats);
    it.consistency = verdict_name(consistency.verdict);

    if (consistency.verdict == Verdict::Inconsistent) {
      out.status = CaseStatus::Inconsistent;
      feedback = feedback_for_inconsistency(logic, consistency);
      it.gave_feedback = true;
      it.feedback = *feedback;
      out.trace.push_back(std::move(it));
      continue;
    }
    if (consistency.verdict != Verdict::Consistent) {
      it.note = consistency.detail;
      out.status = CaseStatus::Timeout;
      out.trace.push_back(std::move(it));
      break;
    }

    // Stage (iii): walk the explanation chain to the first unprovable entry.
    const ChainReport chain = clock.timed([&] {
      return locate_failed_step(logic, f.theory, f.steps, f.goal, opts.prover, case_budget);
    });
    for (const StepResult& sr : chain.steps) {
      clock.charge(sr.cert.stats);
      it.step_verdicts.push_back(verdict_name(sr.cert.verdict));
    }
    it.failed_index = chain.failed_index;

    if (chain.all_entailed) {
      bool bounded = false;
      for (const StepResult& sr : chain.steps)
        bounded = bounded || sr.cert.verdict == Verdict::EntailedUpToBound;
      out.status = bounded ? CaseStatus::VerifiedUpToBound : CaseStatus::Verified;
      out.trace.push_back(std::move(it));
      break;
    }

    const Certificate& failed_cert = chain.steps.back().cert;
    if (failed_cert.verdict == Verdict::Unknown) {
      it.note = failed_cert.detail;
      out.status = CaseStatus::Timeout;
      out.trace.push_back(std::move(it));
      break;
    }

    // Stage (iv): the step is refuted; turn the countermodel into feedback and go again.
    out.status = CaseStatus::Failed;
    const Formalization& formalization = std::get<Formalization>(fr);
    feedback = feedback_for_chain(logic, chain, formalization);
    it.gave_feedback = true;
    it.feedback = *feedback;
    out.trace.push_back(std::move(it));
  }

  out.solving_ms = clock.total_ms();
  return out;
}

std::string dump_case_outcome(const CaseOutcome& outcome) {
  std::ostringstream out;
  out << "case: " << outcome.case_id << "\n";
  out << "domain: " << domain_name(outcome.domain) << "\n";
  out << "logic: " << logic_name(outcome.logic) << "\n";
  out << "formalizer: " << outcome.formalizer << "\n";
  out << "status: " << case_status_name(outcome.status) << "\n";
  out << "iterations: " << outcome.iterations_used << "\n";
  out << "solving-ms: " << outcome.solving_ms << "\n";
  if (!outcome.error_category.empty())
    out << "error-category: " << outcome.error_category << "\n";
  for (const IterationTrace& it : outcome.trace) {
    out << "iteration " << it.index << ":\n";
    for (size_t i = 0; i < it.theory.size(); ++i)
      out << "  theory[" << i << "]: " << it.theory[i] << "\n";
    for (size_t i = 0; i < it.steps.size(); ++i)
      out << "  step[" << i << "]: " << it.steps[i] << "\n";
    if (it.formalized) out << "  goal: " << it.goal << "\n";
    if (!it.consistency.empty()) out << "  consistency: " << it.consistency << "\n";
    for (size_t i = 0; i < it.step_verdicts.size(); ++i)
      out << "  check[" << i << "]: " << it.step_verdicts[i] << "\n";
    if (it.failed_index >= 0) out << "  failed-index: " << it.failed_index << "\n";
    if (!it.note.empty()) out << "  note: " << it.note << "\n";
    if (it.gave_feedback) {
      out << "  feedback: " << feedback_kind_name(it.feedback.kind) << "\n";
      std::istringstream lines(it.feedback.guidance);
      std::string line;
      while (std::getline(lines, line)) out << "    " << line << "\n";
    }
  }
  return out.str();
}

}  // namespace logiparam
