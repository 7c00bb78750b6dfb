#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <initializer_list>
#include <variant>

#include "logiparam/parser.hpp"
#include "logiparam/prover.hpp"
#include "support/testutil.hpp"

using namespace logiparam;

namespace {

FormulaPtr P(const std::string& src, LogicId logic) {
  const ParseResult r = parse_formula(src, logic);
  if (const auto* err = std::get_if<ParseError>(&r))
    FAIL("parse of '" << src << "' failed: " << err->message);
  return std::get<FormulaPtr>(r);
}

std::vector<FormulaPtr> T(std::initializer_list<const char*> srcs, LogicId logic) {
  std::vector<FormulaPtr> out;
  for (const char* s : srcs) out.push_back(P(s, logic));
  return out;
}

const ProverOptions kOpts;
const Budget kNoLimit = Budget::unlimited();

Certificate entails(LogicId logic, std::initializer_list<const char*> theory,
                    const char* goal) {
  return check_entailment(logic, T(theory, logic), P(goal, logic), kOpts, kNoLimit);
}

Certificate consistent(LogicId logic, std::initializer_list<const char*> theory) {
  return check_consistency(logic, T(theory, logic), kOpts, kNoLimit);
}

}  // namespace

TEST_CASE("serial modal logic: duties imply permissions and aggregate") {
  const Certificate d = entails(LogicId::KD, {}, "O(p) -> P(p)");
  CHECK(d.verdict == Verdict::Entailed);
  CHECK_FALSE(d.bound_limited);
  CHECK(d.detail == "closed tableau");

  CHECK(entails(LogicId::KD, {"O(p)", "O(q)"}, "O((p & q))").verdict == Verdict::Entailed);
  CHECK(entails(LogicId::KD, {}, "O(true)").verdict == Verdict::Entailed);
  CHECK(entails(LogicId::KD, {"p -> O(q)", "p"}, "O(q)").verdict == Verdict::Entailed);
  CHECK(consistent(LogicId::KD, {"O(p)", "O(~p)"}).verdict == Verdict::Inconsistent);
  CHECK(consistent(LogicId::KD, {"O(p)", "~p"}).verdict == Verdict::Consistent);
}

TEST_CASE("serial modal logic: refutations carry a checkable countermodel") {
  const Certificate c = entails(LogicId::KD, {"O(p)"}, "p");
  REQUIRE(c.verdict == Verdict::Refuted);
  REQUIRE(c.has_model);
  const auto& m = std::get<KripkeModel>(c.model);
  CHECK(m.validate().empty());
  CHECK(eval(m, 0, P("O(p)", LogicId::KD)));
  CHECK_FALSE(eval(m, 0, P("p", LogicId::KD)));
  CHECK(c.worlds_checked == m.num_worlds);
  CHECK(c.detail.find("countermodel") != std::string::npos);

  CHECK(entails(LogicId::KD, {"O((p | q))"}, "O(p)").verdict == Verdict::Refuted);
}

TEST_CASE("tableau agrees with the bounded encoding and the evaluator") {
  testutil::FormulaGen gen(71, {"p", "q"});
  const auto two_world = testutil::all_kripke_models(2, {"p", "q"}, true);
  for (int i = 0; i < 40; ++i) {
    const FormulaPtr f = gen.next(LogicId::KD, 3, 2);
    const KdResult r = kd_satisfiable({f}, kNoLimit);
    REQUIRE(r.status != SatCheck::ResourceOut);
    INFO("formula: " << pretty(f));
    if (r.status == SatCheck::Satisfiable) {
      CHECK(r.model.validate().empty());
      CHECK(eval(r.model, 0, f));
    } else {
      // a closed tableau must not contradict the exhaustive two-world search
      for (const KripkeModel& m : two_world) REQUIRE_FALSE(eval(m, 0, f));
    }
  }
}

TEST_CASE("betterness logic: deontic detachment holds, factual detachment fails") {
  const Certificate deontic = entails(LogicId::DDLE, {"O(p)", "O(q|p)"}, "O(q)");
  CHECK(deontic.verdict == Verdict::EntailedUpToBound);
  CHECK(deontic.bound_limited);
  CHECK(deontic.worlds_checked == kOpts.max_worlds_ddle);
  CHECK(deontic.detail == "no countermodel with at most 4 worlds");

  const Certificate factual = entails(LogicId::DDLE, {"p", "O(q|p)"}, "O(q)");
  REQUIRE(factual.verdict == Verdict::Refuted);
  CHECK_FALSE(factual.bound_limited);
  REQUIRE(factual.has_model);
  const auto& m = std::get<PreferenceModel>(factual.model);
  CHECK(m.validate().empty());
  CHECK(eval(m, 0, P("p", LogicId::DDLE)));
  CHECK(eval(m, 0, P("O(q|p)", LogicId::DDLE)));
  CHECK_FALSE(eval(m, 0, P("O(q)", LogicId::DDLE)));
}

TEST_CASE("betterness logic: no strengthening of the antecedent") {
  CHECK(entails(LogicId::DDLE, {"O(q|p)"}, "O(q|(p & r))").verdict == Verdict::Refuted);
  // but the weaker conclusion under the original condition stays
  CHECK(entails(LogicId::DDLE, {"O(q|p)", "Box (p <-> s)"}, "O(q|s)").verdict ==
        Verdict::EntailedUpToBound);
}

TEST_CASE("betterness logic: contrary-to-duty sets are satisfiable") {
  const Certificate c =
      consistent(LogicId::DDLE, {"~h", "O(h)", "O(~t|~h)", "O(t|h)"});
  REQUIRE(c.verdict == Verdict::Consistent);
  CHECK(c.worlds_checked == 2);  // one world cannot hold the ideal and the actual apart
  CHECK(c.detail == "witness model with 2 worlds");
  REQUIRE(c.has_model);
  CHECK(std::get<PreferenceModel>(c.model).validate().empty());
}

TEST_CASE("betterness logic: vacuous duty versus vacuous permission") {
  CHECK(consistent(LogicId::DDLE, {"O(q|false)"}).verdict == Verdict::Consistent);
  const Certificate perm = consistent(LogicId::DDLE, {"P(q|false)"});
  CHECK(perm.verdict == Verdict::Inconsistent);
  CHECK(perm.bound_limited);  // unsatisfiability was only explored up to the bound
}

TEST_CASE("actual/potential logic: detachment needs explicit non-triviality") {
  const std::initializer_list<const char*> detachable = {
      "O(q|p)", "BoxA p", "~BoxA ~q", "~BoxA q"};
  CHECK(consistent(LogicId::DDL_CJ, detachable).verdict == Verdict::Consistent);
  const Certificate ok = entails(LogicId::DDL_CJ, detachable, "Oa q");
  CHECK(ok.verdict == Verdict::EntailedUpToBound);
  CHECK(ok.worlds_checked == kOpts.max_worlds_cj);

  // without ruling out that the duty is settled or unreachable, nothing detaches
  const Certificate missing = entails(LogicId::DDL_CJ, {"O(q|p)", "BoxA p"}, "Oa q");
  REQUIRE(missing.verdict == Verdict::Refuted);
  REQUIRE(missing.has_model);
  const auto& m = std::get<CJModel>(missing.model);
  CHECK(m.validate().empty());
  CHECK_FALSE(eval(m, 0, P("Oa q", LogicId::DDL_CJ)));
}

TEST_CASE("actual/potential logic: contrary-to-duty sets are satisfiable") {
  const Certificate c = consistent(
      LogicId::DDL_CJ, {"O(h|true)", "O(t|h)", "O(~t|~h)", "BoxA ~h"});
  REQUIRE(c.verdict == Verdict::Consistent);
  REQUIRE(c.has_model);
  const auto& m = std::get<CJModel>(c.model);
  CHECK(m.validate().empty());
  CHECK(eval(m, 0, P("BoxA ~h", LogicId::DDL_CJ)));
}

TEST_CASE("first-order queries over the declared constants") {
  const Certificate barbara = entails(
      LogicId::FOL, {"forall x. (Man(x) -> Mortal(x))", "Man(socrates)"}, "Mortal(socrates)");
  CHECK(barbara.verdict == Verdict::Entailed);
  CHECK(barbara.detail == "no counter-interpretation over the declared constants");
  CHECK_FALSE(barbara.bound_limited);

  CHECK(entails(LogicId::FOL, {"Sick(a) | Healthy(a)", "~Sick(a)"}, "Healthy(a)").verdict ==
        Verdict::Entailed);
  CHECK(entails(LogicId::FOL, {"forall x. Loves(x, a)"}, "exists y. Loves(a, y)").verdict ==
        Verdict::Entailed);

  // domain = mentioned constants: with only 'a' declared, the witness must be 'a'
  CHECK(entails(LogicId::FOL, {"exists x. Pretty(x)"}, "Pretty(a)").verdict ==
        Verdict::Entailed);

  const Certificate refuted =
      entails(LogicId::FOL, {"forall x. (R(x) -> Q(x))"}, "forall x. Q(x)");
  REQUIRE(refuted.verdict == Verdict::Refuted);
  REQUIRE(refuted.has_model);
  const auto& m = std::get<FolInterp>(refuted.model);
  CHECK(m.domain == std::vector<std::string>{"d0"});
  CHECK_FALSE(eval_fol(m, P("forall x. Q(x)", LogicId::FOL)));
}

TEST_CASE("first-order consistency verdicts") {
  CHECK(consistent(LogicId::FOL, {}).verdict == Verdict::Consistent);
  CHECK(consistent(LogicId::FOL, {}).detail == "no assertions");
  const Certificate bad = consistent(LogicId::FOL, {"R(a)", "~R(a)"});
  CHECK(bad.verdict == Verdict::Inconsistent);
  CHECK(bad.detail == "ground theory is unsatisfiable");
  // entailment alone does not flag the vacuity; the consistency check above does
  CHECK(entails(LogicId::FOL, {"R(a)", "~R(a)"}, "Q(b)").verdict == Verdict::Entailed);
}

TEST_CASE("grounding bookkeeping") {
  const Grounding g = ground_sequent(
      T({"forall x. (R(x) -> Q(x))", "R(a)"}, LogicId::FOL), P("Q(b)", LogicId::FOL));
  CHECK(g.domain == std::vector<std::string>{"a", "b"});
  REQUIRE(g.theory.size() == 2);
  CHECK(g.pred_atoms.count("R(a)") == 1);
  CHECK(g.pred_atoms.count("Q(b)") == 1);
  CHECK(g.pred_atoms.at("Q(b)").first == "Q");
  CHECK(g.pred_atoms.at("Q(b)").second == std::vector<int>{1});

  const Grounding fallback = ground_sequent(T({"p"}, LogicId::FOL), nullptr);
  CHECK(fallback.domain == std::vector<std::string>{"d0"});
  CHECK(fallback.goal == nullptr);
}

TEST_CASE("resource exhaustion yields Unknown, never a verdict") {
  const Budget expired = Budget::from_ms(-10);

  // enough disjunctive branching for the tableau to notice the clock
  std::vector<FormulaPtr> busy;
  FormulaPtr conj = nullptr;
  for (int i = 0; i < 70; ++i) {
    const FormulaPtr pair = Formula::lor(Formula::atom("p" + std::to_string(i)),
                                         Formula::atom("q" + std::to_string(i)));
    conj = conj ? Formula::land(conj, pair) : pair;
  }
  const Certificate kd = check_consistency(LogicId::KD, {conj}, kOpts, expired);
  CHECK(kd.verdict == Verdict::Unknown);
  CHECK(kd.detail == "tableau budget exhausted");

  const Certificate ddle =
      check_consistency(LogicId::DDLE, T({"O(p)"}, LogicId::DDLE), kOpts, expired);
  CHECK(ddle.verdict == Verdict::Unknown);
  CHECK(ddle.detail == "budget exhausted after 0 bounds");

  // two orderings of one equivalence chain: unsatisfiable, and hard for plain DPLL
  FormulaPtr fwd = Formula::atom("x15"), rev = Formula::atom("x0");
  for (int i = 14; i >= 0; --i) fwd = Formula::iff(Formula::atom("x" + std::to_string(i)), fwd);
  for (int i = 1; i <= 15; ++i) rev = Formula::iff(Formula::atom("x" + std::to_string(i)), rev);
  const Certificate fol =
      check_consistency(LogicId::FOL, {fwd, Formula::lnot(rev)}, kOpts, expired);
  CHECK(fol.verdict == Verdict::Unknown);
  CHECK(fol.detail == "solver budget exhausted");
}

TEST_CASE("entailment needs a goal") {
  CHECK_THROWS_AS(
      (void)check_entailment(LogicId::KD, {}, nullptr, kOpts, kNoLimit),
      std::invalid_argument);
}

TEST_CASE("chain checking walks the explanation and then the hypothesis") {
  const LogicId kd = LogicId::KD;
  const std::vector<FormulaPtr> theory = T(
      {"refuses", "~competent", "refuses & ~competent -> undercut", "undercut -> O(treat)"},
      kd);
  const std::vector<FormulaPtr> steps =
      T({"refuses", "~competent", "refuses & ~competent", "undercut"}, kd);
  const FormulaPtr goal = P("O(treat)", kd);

  const ChainReport good = locate_failed_step(kd, theory, steps, goal, kOpts, kNoLimit);
  CHECK(good.all_entailed);
  CHECK(good.failed_index == -1);
  REQUIRE(good.steps.size() == 5);
  CHECK(good.steps.back().is_hypothesis);
  for (const StepResult& sr : good.steps) CHECK(sr.cert.verdict == Verdict::Entailed);

  // drop the duty bridge: every step still follows, the hypothesis does not
  std::vector<FormulaPtr> gapped(theory.begin(), theory.end() - 1);
  const ChainReport gap = locate_failed_step(kd, gapped, steps, goal, kOpts, kNoLimit);
  CHECK_FALSE(gap.all_entailed);
  CHECK(gap.failed_index == 4);
  REQUIRE(gap.steps.size() == 5);
  CHECK(gap.steps.back().is_hypothesis);
  CHECK(gap.steps.back().cert.verdict == Verdict::Refuted);
  CHECK(gap.steps.back().cert.has_model);

  // drop the factual bridge instead: the walk stops at the step that no longer follows
  std::vector<FormulaPtr> broken = {theory[0], theory[1], theory[3]};
  const ChainReport mid = locate_failed_step(kd, broken, steps, goal, kOpts, kNoLimit);
  CHECK_FALSE(mid.all_entailed);
  CHECK(mid.failed_index == 3);
  REQUIRE(mid.steps.size() == 4);  // checking stopped early
  CHECK_FALSE(mid.steps.back().is_hypothesis);
  CHECK(mid.steps.back().cert.verdict == Verdict::Refuted);
}

TEST_CASE("chain checking accepts bound-limited positives") {
  const LogicId ddle = LogicId::DDLE;
  const std::vector<FormulaPtr> theory = T({"~h", "O(h)", "O(~t|~h)", "O(t|h)"}, ddle);
  const ChainReport r = locate_failed_step(ddle, theory, T({"~h"}, ddle),
                                           P("O(~t)", ddle), kOpts, kNoLimit);
  // the repetition of a premise passes (up to the bound), the detached duty does not
  CHECK_FALSE(r.all_entailed);
  REQUIRE(r.steps.size() == 2);
  CHECK(r.steps[0].cert.verdict == Verdict::EntailedUpToBound);
  CHECK(r.failed_index == 1);
  CHECK(r.steps[1].cert.verdict == Verdict::Refuted);
}
