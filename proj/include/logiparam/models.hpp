#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "logiparam/formula.hpp"

namespace logiparam {

// Finite models for the supported logics. Worlds are indexed 0..num_worlds-1 and sets of
// worlds are bitmasks, so num_worlds is capped well below 32 in practice (the bounded
// search never goes past a handful). Valuations default missing atoms to false.

using WorldSet = std::uint32_t;

std::string world_set_to_string(WorldSet s, int num_worlds);

struct KripkeModel {
  int num_worlds = 0;
  std::vector<WorldSet> access;                  // access[w] = successor set of w
  std::vector<std::map<std::string, bool>> val;  // val[w][atom]

  bool atom_true(int w, const std::string& name) const;
  // Empty when the model is a well-shaped serial frame; otherwise one line per defect.
  std::vector<std::string> validate(bool require_serial = true) const;
  std::string dump() const;
};

// Betterness model: better[w] is the set of worlds v with w at least as good as v.
// The relation must be a total preorder; validate() checks that exhaustively.
struct PreferenceModel {
  int num_worlds = 0;
  std::vector<WorldSet> better;
  std::vector<std::map<std::string, bool>> val;

  bool atom_true(int w, const std::string& name) const;
  std::vector<std::string> validate() const;
  // Worlds of s that are at least as good as every world of s.
  WorldSet best(WorldSet s) const;
  std::string dump() const;
};

// Model with actual/potential versions of each world and a context-indexed obligation
// relation: (X, Y) in ob means Y is obligatory in context X.
struct CJModel {
  int num_worlds = 0;
  std::vector<WorldSet> av;
  std::vector<WorldSet> pv;
  std::set<std::pair<WorldSet, WorldSet>> ob;
  std::vector<std::map<std::string, bool>> val;

  bool atom_true(int w, const std::string& name) const;
  bool ob_contains(WorldSet context, WorldSet member) const;
  // Extends ob with everything forced by the context-equivalence rule, so hand-built
  // models only need to seed the intended obligations.
  void close_ob_under_context_equivalence();
  std::vector<std::string> validate() const;
  std::string dump() const;
};

// The structural conditions on the ob relation, shared verbatim between CJModel::validate
// and the SAT encoding. Each rule quantifies over up to three subsets X, Y, Z of the world
// set; when the guard holds and every premise pair is in ob, the conclusion pair must be
// in ob too (or must not be, for the one negative rule).
using ObMaskFn = WorldSet (*)(WorldSet x, WorldSet y, WorldSet z, WorldSet full);
using ObGuardFn = bool (*)(WorldSet x, WorldSet y, WorldSet z, WorldSet full);

struct ObMembership {
  ObMaskFn context;
  ObMaskFn member;
};

struct ObRule {
  const char* name;
  int arity;  // how many of X, Y, Z the rule ranges over (the rest stay 0)
  ObGuardFn guard;
  int num_premises;
  std::array<ObMembership, 2> premises;
  ObMembership conclusion;
  bool conclusion_in_ob;  // false: the conclusion pair must be absent
};

const std::array<ObRule, 5>& ob_rules();

// Fixed-domain first-order interpretation. Relations list their true tuples (of domain
// indices); anything unlisted is false. Nullary atoms live in props.
struct FolInterp {
  std::vector<std::string> domain;  // constant names, index = element
  std::map<std::string, bool> props;
  std::map<std::string, std::set<std::vector<int>>> rel;

  int element(const std::string& constant) const;  // -1 when unknown
  std::string dump() const;
};

using Model = std::variant<KripkeModel, PreferenceModel, CJModel, FolInterp>;

// Truth at a world. Throws std::invalid_argument on operators the model type has no
// reading for (e.g. quantifiers in a Kripke model), mirroring the signature table.
bool eval(const KripkeModel& m, int world, const FormulaPtr& f);
bool eval(const PreferenceModel& m, int world, const FormulaPtr& f);
bool eval(const CJModel& m, int world, const FormulaPtr& f);
bool eval_fol(const FolInterp& m, const FormulaPtr& f);

bool eval(const Model& m, int world, const FormulaPtr& f);
bool holds_globally(const Model& m, const FormulaPtr& f);
std::string dump_model(const Model& m);
int model_world_count(const Model& m);

}  // namespace logiparam
