#pragma once

#include <cassert>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace logiparam {

// The four logics the engine can be instantiated with.
enum class LogicId { FOL, KD, DDLE, DDL_CJ };

const char* logic_name(LogicId logic);
bool logic_from_name(const std::string& name, LogicId& out);

// First-order terms. The function-free fragment only has variables and constants.
struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Const;
  std::string name;

  static Term var(std::string n) { return Term{Kind::Var, std::move(n)}; }
  static Term cons(std::string n) { return Term{Kind::Const, std::move(n)}; }

  bool operator==(const Term& o) const { return kind == o.kind && name == o.name; }
  bool operator!=(const Term& o) const { return !(*this == o); }
};

enum class Conn : std::uint8_t {
  Atom,    // propositional atom, name
  Pred,    // predicate applied to terms, name + args
  Top,
  Bot,
  Not,     // kid 0
  And,     // kids 0, 1
  Or,
  Impl,
  Iff,
  Forall,  // var name + kid 0
  Exists,
  Ob,      // monadic obligation, kid 0
  Perm,    // monadic permission
  Forb,    // prohibition
  Box,     // alethic necessity (DDLE / DDL_CJ, quantifies over all worlds)
  Dia,
  ObC,     // dyadic obligation O(kid0 | kid1): consequent first, antecedent second
  PermC,   // dyadic permission
  BoxA,    // DDL_CJ: necessity over actual versions av(w)
  BoxP,    // DDL_CJ: necessity over potential versions pv(w)
  ObA,     // DDL_CJ: actual obligation
  ObP,     // DDL_CJ: potential obligation
};

const char* conn_name(Conn c);

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable n-ary tree. Nodes are shared freely; all rewrites build new trees.
class Formula {
 public:
  Conn kind() const { return kind_; }
  // Atom/Pred name, or the bound variable for Forall/Exists.
  const std::string& name() const { return name_; }
  const std::vector<Term>& args() const { return args_; }
  const std::vector<FormulaPtr>& kids() const { return kids_; }

  const FormulaPtr& kid(size_t i) const {
    assert(i < kids_.size());
    return kids_[i];
  }

  bool is(Conn c) const { return kind_ == c; }

  static FormulaPtr atom(std::string name);
  static FormulaPtr pred(std::string name, std::vector<Term> args);
  static FormulaPtr top();
  static FormulaPtr bot();
  static FormulaPtr lnot(FormulaPtr f);
  static FormulaPtr land(FormulaPtr a, FormulaPtr b);
  static FormulaPtr lor(FormulaPtr a, FormulaPtr b);
  static FormulaPtr impl(FormulaPtr a, FormulaPtr b);
  static FormulaPtr iff(FormulaPtr a, FormulaPtr b);
  static FormulaPtr forall(std::string var, FormulaPtr body);
  static FormulaPtr exists(std::string var, FormulaPtr body);
  static FormulaPtr ob(FormulaPtr f);
  static FormulaPtr perm(FormulaPtr f);
  static FormulaPtr forb(FormulaPtr f);
  static FormulaPtr box(FormulaPtr f);
  static FormulaPtr dia(FormulaPtr f);
  static FormulaPtr ob_c(FormulaPtr consequent, FormulaPtr antecedent);
  static FormulaPtr perm_c(FormulaPtr consequent, FormulaPtr antecedent);
  static FormulaPtr box_a(FormulaPtr f);
  static FormulaPtr box_p(FormulaPtr f);
  static FormulaPtr ob_a(FormulaPtr f);
  static FormulaPtr ob_p(FormulaPtr f);

  Formula(Conn k, std::string name, std::vector<Term> args, std::vector<FormulaPtr> kids)
      : kind_(k), name_(std::move(name)), args_(std::move(args)), kids_(std::move(kids)) {}

 private:
  Conn kind_;
  std::string name_;
  std::vector<Term> args_;
  std::vector<FormulaPtr> kids_;
};

// Structural equality / hashing (pointer-identity is not meaningful for rebuilt trees).
bool equal(const FormulaPtr& a, const FormulaPtr& b);
size_t hash_value(const FormulaPtr& f);

struct FormulaHash {
  size_t operator()(const FormulaPtr& f) const { return hash_value(f); }
};
struct FormulaEq {
  bool operator()(const FormulaPtr& a, const FormulaPtr& b) const { return equal(a, b); }
};

// One signature violation, with a path into the tree ("0.1" = second kid of first kid).
struct Violation {
  std::string path;
  std::string message;
};

struct WellFormedReport {
  bool ok = true;
  std::vector<Violation> violations;
};

// Checks f against the operator signature and term discipline of `logic`:
// FOL admits quantifiers/predicates and no modal operators; KD admits Ob/Perm/Forb over a
// propositional base; DDLE adds Box/Dia/ObC/PermC; DDL_CJ adds BoxA/BoxP/ObA/ObP on top of
// DDLE. All logics reject free variables and quantifier shadowing; only FOL may bind at all.
WellFormedReport well_formed(const FormulaPtr& f, LogicId logic);

// Rewrites Perm, Forb, Dia, PermC into their duals:
//   Perm g  -> ~Ob ~g      Forb g -> Ob ~g      Dia g -> ~Box ~g
//   P(g|f)  -> ~O(~g|f)
// Pure connectives and everything else are rebuilt unchanged.
FormulaPtr expand_duals(const FormulaPtr& f);

// Eliminates Iff as (a -> b) & (b -> a) and constant-folds Top/Bot through the boolean
// connectives. Top/Bot can survive only where they are semantically irreducible (the whole
// formula, or an ObC/PermC antecedent).
FormulaPtr simplify(const FormulaPtr& f);

// DDLE / DDL_CJ read monadic deontic operators as the dyadic ones with a vacuous
// antecedent: Ob g -> O(g|true), Perm g -> P(g|true), Forb g -> O(~g|true). Identity for
// FOL / KD.
FormulaPtr desugar_monadic(const FormulaPtr& f, LogicId logic);

// Negation normal form: pushes ~ down to atoms and modal operators (negations park on
// modal/deontic nodes rather than crossing them), flips quantifiers, removes double
// negations. Expects Iff to be gone (call simplify first); asserts otherwise.
FormulaPtr nnf(const FormulaPtr& f);

// Every Atom and Pred name occurring in f, sorted.
std::set<std::string> atoms(const FormulaPtr& f);

// Every constant name occurring in f (FOL), sorted.
std::set<std::string> constants(const FormulaPtr& f);

// Surface syntax printer; parse(pretty(f), logic) reproduces f for well-formed f whose
// atom, predicate and constant names avoid the reserved operator keywords (O, P, F, Box,
// Dia, BoxA, BoxP, Oa, Op, forall, exists, true, false).
std::string pretty(const FormulaPtr& f);

}  // namespace logiparam
