#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <variant>

#include "logiparam/encode.hpp"
#include "support/testutil.hpp"

using namespace logiparam;

namespace {

std::vector<std::string> validate_model(const Model& m) {
  if (const auto* k = std::get_if<KripkeModel>(&m)) return k->validate();
  if (const auto* p = std::get_if<PreferenceModel>(&m)) return p->validate();
  if (const auto* c = std::get_if<CJModel>(&m)) return c->validate();
  return {};
}

// ground truth: some enumerated model satisfies the theory at the anchor world and,
// when a goal is given, falsifies the goal there
template <typename ModelVec>
bool oracle_has_model(const ModelVec& models, const std::vector<FormulaPtr>& theory,
                      const FormulaPtr& goal) {
  for (const auto& m : models) {
    bool ok = true;
    for (const auto& f : theory) ok = ok && eval(m, 0, f);
    if (ok && goal) ok = !eval(m, 0, goal);
    if (ok) return true;
  }
  return false;
}

template <typename ModelVec>
void cross_check(LogicId logic, const ModelVec& models, int k, unsigned seed, int rounds,
                 const std::vector<std::string>& atoms) {
  testutil::FormulaGen gen(seed, atoms);
  for (int i = 0; i < rounds; ++i) {
    std::vector<FormulaPtr> theory = {gen.next(logic, 3, 2)};
    if (i % 2) theory.push_back(gen.next(logic, 2, 1));
    const FormulaPtr goal = (i % 3) ? gen.next(logic, 2, 1) : nullptr;
    const BoundedSearchResult r =
        find_model(logic, theory, goal, k, true, Budget::unlimited());
    REQUIRE(r.status != SatStatus::Timeout);
    const bool expect = oracle_has_model(models, theory, goal);
    INFO("k=" << k << " theory[0]: " << pretty(theory[0])
              << (theory.size() > 1 ? " theory[1]: " + pretty(theory[1]) : std::string())
              << (goal ? " goal: " + pretty(goal) : std::string(" (consistency)")));
    REQUIRE((r.status == SatStatus::Sat) == expect);
    if (r.status == SatStatus::Sat) {
      CHECK(r.confirmed);
      CHECK(validate_model(r.model).empty());
      for (const auto& f : theory) CHECK(eval(r.model, 0, f));
      if (goal) CHECK_FALSE(eval(r.model, 0, goal));
    }
  }
}

}  // namespace

TEST_CASE("encoding shapes and input guards") {
  const FormulaPtr p = Formula::atom("p");
  const FormulaPtr theory = Formula::land(Formula::ob(p), Formula::atom("b"));

  const EncodeResult kd = encode_bounded(LogicId::KD, {theory}, nullptr, 3);
  CHECK(kd.num_worlds == 3);
  CHECK(kd.relation_var.size() == 3);
  CHECK(kd.relation_var[0].size() == 3);
  CHECK(kd.atom_names == std::vector<std::string>{"b", "p"});
  CHECK(kd.goal == nullptr);
  REQUIRE(kd.theory.size() == 1);

  const EncodeResult cj =
      encode_bounded(LogicId::DDL_CJ, {Formula::ob_a(p)}, Formula::box_p(p), 2);
  CHECK(cj.av_var.size() == 2);
  CHECK(cj.pv_var.size() == 2);
  CHECK(cj.ob_var.size() == 4);
  CHECK(cj.ob_var[3].size() == 4);
  CHECK(cj.goal != nullptr);

  CHECK_THROWS_AS((void)encode_bounded(LogicId::FOL, {p}, nullptr, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)encode_bounded(LogicId::KD, {p}, nullptr, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)encode_bounded(LogicId::KD, {p}, nullptr, 9), std::invalid_argument);
}

TEST_CASE("world-independent operators share one variable per row") {
  const FormulaPtr p = Formula::atom("p");
  const EncodeResult box = encode_bounded(LogicId::DDLE, {Formula::box(p)}, nullptr, 3);
  const auto& box_row = box.truth_var.at(box.theory[0]);
  REQUIRE(box_row.size() == 3);
  CHECK(box_row[0] == box_row[1]);
  CHECK(box_row[1] == box_row[2]);

  const FormulaPtr duty = Formula::ob_c(Formula::atom("q"), p);
  const EncodeResult obc = encode_bounded(LogicId::DDLE, {duty}, nullptr, 2);
  const auto& obc_row = obc.truth_var.at(obc.theory[0]);
  CHECK(obc_row[0] == obc_row[1]);
}

TEST_CASE("an empty theory is satisfiable and decodes to a well-shaped model") {
  const BoundedSearchResult r =
      find_model(LogicId::KD, {}, nullptr, 1, true, Budget::unlimited());
  REQUIRE(r.status == SatStatus::Sat);
  CHECK(r.confirmed);
  CHECK(validate_model(r.model).empty());
  CHECK(model_world_count(r.model) == 1);
}

TEST_CASE("decoded assignments reproduce the anchored query") {
  const FormulaPtr p = Formula::atom("p");
  const EncodeResult enc =
      encode_bounded(LogicId::KD, {Formula::ob(p)}, Formula::atom("p"), 2);
  const SolveResult solved = solve(enc.cnf, Budget::unlimited());
  REQUIRE(solved.status == SatStatus::Sat);
  const Model m = decode_model(enc, solved.assignment);
  CHECK(validate_model(m).empty());
  CHECK(eval(m, 0, Formula::ob(p)));
  CHECK_FALSE(eval(m, 0, p));
}

TEST_CASE("Kripke search agrees with exhaustive enumeration") {
  const std::vector<std::string> atoms = {"p", "q"};
  cross_check(LogicId::KD, testutil::all_kripke_models(1, atoms, true), 1, 41, 40, atoms);
  cross_check(LogicId::KD, testutil::all_kripke_models(2, atoms, true), 2, 42, 40, atoms);
}

TEST_CASE("dropping seriality re-admits successor-free worlds") {
  const FormulaPtr p = Formula::atom("p");
  const std::vector<FormulaPtr> theory = {Formula::ob(p)};
  const FormulaPtr goal = Formula::perm(p);
  for (int k = 1; k <= 3; ++k)
    CHECK(find_model(LogicId::KD, theory, goal, k, true, Budget::unlimited()).status ==
          SatStatus::Unsat);
  const BoundedSearchResult loose =
      find_model(LogicId::KD, theory, goal, 1, false, Budget::unlimited());
  REQUIRE(loose.status == SatStatus::Sat);
  CHECK(std::get<KripkeModel>(loose.model).access[0] == 0);
}

TEST_CASE("betterness search agrees with exhaustive enumeration") {
  const std::vector<std::string> atoms = {"p", "q"};
  cross_check(LogicId::DDLE, testutil::all_preference_models(1, atoms), 1, 51, 30, atoms);
  cross_check(LogicId::DDLE, testutil::all_preference_models(2, atoms), 2, 52, 30, atoms);
  cross_check(LogicId::DDLE, testutil::all_preference_models(3, atoms), 3, 53, 10, atoms);
}

TEST_CASE("actual/potential search agrees with exhaustive enumeration") {
  const std::vector<std::string> atoms = {"p", "q"};
  cross_check(LogicId::DDL_CJ, testutil::all_cj_models_one_world(atoms), 1, 61, 30, atoms);
  cross_check(LogicId::DDL_CJ, testutil::all_cj_models_two_worlds(atoms), 2, 62, 20, atoms);
}

TEST_CASE("actual-version duties require a world that breaks them") {
  // with one world the duty is either trivially met or demands the empty set
  const std::vector<FormulaPtr> theory = {Formula::ob_a(Formula::atom("p"))};
  CHECK(find_model(LogicId::DDL_CJ, theory, nullptr, 1, true, Budget::unlimited()).status ==
        SatStatus::Unsat);
  const BoundedSearchResult two =
      find_model(LogicId::DDL_CJ, theory, nullptr, 2, true, Budget::unlimited());
  REQUIRE(two.status == SatStatus::Sat);
  CHECK(two.confirmed);
}
