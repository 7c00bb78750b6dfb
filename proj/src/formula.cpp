#include "logiparam/formula.hpp"

#include <algorithm>
#include <functional>

namespace logiparam {

const char* logic_name(LogicId logic) {
  switch (logic) {
    case LogicId::FOL: return "fol";
    case LogicId::KD: return "kd";
    case LogicId::DDLE: return "ddle";
    case LogicId::DDL_CJ: return "ddl-cj";
  }
  return "?";
}

bool logic_from_name(const std::string& name, LogicId& out) {
  if (name == "fol" || name == "FOL") { out = LogicId::FOL; return true; }
  if (name == "kd" || name == "KD") { out = LogicId::KD; return true; }
  if (name == "ddle" || name == "DDLE") { out = LogicId::DDLE; return true; }
  if (name == "ddl-cj" || name == "DDL-CJ" || name == "ddl_cj" || name == "DDL_CJ") {
    out = LogicId::DDL_CJ;
    return true;
  }
  return false;
}

const char* conn_name(Conn c) {
  switch (c) {
    case Conn::Atom: return "atom";
    case Conn::Pred: return "pred";
    case Conn::Top: return "top";
    case Conn::Bot: return "bot";
    case Conn::Not: return "not";
    case Conn::And: return "and";
    case Conn::Or: return "or";
    case Conn::Impl: return "impl";
    case Conn::Iff: return "iff";
    case Conn::Forall: return "forall";
    case Conn::Exists: return "exists";
    case Conn::Ob: return "ob";
    case Conn::Perm: return "perm";
    case Conn::Forb: return "forb";
    case Conn::Box: return "box";
    case Conn::Dia: return "dia";
    case Conn::ObC: return "ob-c";
    case Conn::PermC: return "perm-c";
    case Conn::BoxA: return "box-a";
    case Conn::BoxP: return "box-p";
    case Conn::ObA: return "ob-a";
    case Conn::ObP: return "ob-p";
  }
  return "?";
}

namespace {
FormulaPtr mk(Conn k, std::string name, std::vector<Term> args, std::vector<FormulaPtr> kids) {
  return std::make_shared<Formula>(k, std::move(name), std::move(args), std::move(kids));
}
FormulaPtr mk1(Conn k, FormulaPtr a) { return mk(k, "", {}, {std::move(a)}); }
FormulaPtr mk2(Conn k, FormulaPtr a, FormulaPtr b) { return mk(k, "", {}, {std::move(a), std::move(b)}); }
}  // namespace

FormulaPtr Formula::atom(std::string name) { return mk(Conn::Atom, std::move(name), {}, {}); }
FormulaPtr Formula::pred(std::string name, std::vector<Term> args) {
  return mk(Conn::Pred, std::move(name), std::move(args), {});
}
FormulaPtr Formula::top() { return mk(Conn::Top, "", {}, {}); }
FormulaPtr Formula::bot() { return mk(Conn::Bot, "", {}, {}); }
FormulaPtr Formula::lnot(FormulaPtr f) { return mk1(Conn::Not, std::move(f)); }
FormulaPtr Formula::land(FormulaPtr a, FormulaPtr b) { return mk2(Conn::And, std::move(a), std::move(b)); }
FormulaPtr Formula::lor(FormulaPtr a, FormulaPtr b) { return mk2(Conn::Or, std::move(a), std::move(b)); }
FormulaPtr Formula::impl(FormulaPtr a, FormulaPtr b) { return mk2(Conn::Impl, std::move(a), std::move(b)); }
FormulaPtr Formula::iff(FormulaPtr a, FormulaPtr b) { return mk2(Conn::Iff, std::move(a), std::move(b)); }
FormulaPtr Formula::forall(std::string var, FormulaPtr body) {
  return mk(Conn::Forall, std::move(var), {}, {std::move(body)});
}
FormulaPtr Formula::exists(std::string var, FormulaPtr body) {
  return mk(Conn::Exists, std::move(var), {}, {std::move(body)});
}
FormulaPtr Formula::ob(FormulaPtr f) { return mk1(Conn::Ob, std::move(f)); }
FormulaPtr Formula::perm(FormulaPtr f) { return mk1(Conn::Perm, std::move(f)); }
FormulaPtr Formula::forb(FormulaPtr f) { return mk1(Conn::Forb, std::move(f)); }
FormulaPtr Formula::box(FormulaPtr f) { return mk1(Conn::Box, std::move(f)); }
FormulaPtr Formula::dia(FormulaPtr f) { return mk1(Conn::Dia, std::move(f)); }
FormulaPtr Formula::ob_c(FormulaPtr consequent, FormulaPtr antecedent) {
  return mk2(Conn::ObC, std::move(consequent), std::move(antecedent));
}
FormulaPtr Formula::perm_c(FormulaPtr consequent, FormulaPtr antecedent) {
  return mk2(Conn::PermC, std::move(consequent), std::move(antecedent));
}
FormulaPtr Formula::box_a(FormulaPtr f) { return mk1(Conn::BoxA, std::move(f)); }
FormulaPtr Formula::box_p(FormulaPtr f) { return mk1(Conn::BoxP, std::move(f)); }
FormulaPtr Formula::ob_a(FormulaPtr f) { return mk1(Conn::ObA, std::move(f)); }
FormulaPtr Formula::ob_p(FormulaPtr f) { return mk1(Conn::ObP, std::move(f)); }

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind() || a->name() != b->name()) return false;
  if (a->args() != b->args()) return false;
  if (a->kids().size() != b->kids().size()) return false;
  for (size_t i = 0; i < a->kids().size(); ++i)
    if (!equal(a->kid(i), b->kid(i))) return false;
  return true;
}

size_t hash_value(const FormulaPtr& f) {
  if (!f) return 0;
  size_t h = std::hash<int>()(static_cast<int>(f->kind()));
  auto mix = [&h](size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(std::hash<std::string>()(f->name()));
  for (const auto& t : f->args()) {
    mix(std::hash<int>()(static_cast<int>(t.kind)));
    mix(std::hash<std::string>()(t.name));
  }
  for (const auto& k : f->kids()) mix(hash_value(k));
  return h;
}

namespace {

bool admits(Conn c, LogicId logic) {
  switch (c) {
    case Conn::Atom:
    case Conn::Top:
    case Conn::Bot:
    case Conn::Not:
    case Conn::And:
    case Conn::Or:
    case Conn::Impl:
    case Conn::Iff:
      return true;
    case Conn::Pred:
    case Conn::Forall:
    case Conn::Exists:
      return logic == LogicId::FOL;
    case Conn::Ob:
    case Conn::Perm:
    case Conn::Forb:
      return logic != LogicId::FOL;
    case Conn::Box:
    case Conn::Dia:
    case Conn::ObC:
    case Conn::PermC:
      return logic == LogicId::DDLE || logic == LogicId::DDL_CJ;
    case Conn::BoxA:
    case Conn::BoxP:
    case Conn::ObA:
    case Conn::ObP:
      return logic == LogicId::DDL_CJ;
  }
  return false;
}

void check_node(const FormulaPtr& f, LogicId logic, const std::string& path,
                std::vector<std::string>& bound, std::vector<Violation>& out) {
  if (!admits(f->kind(), logic)) {
    out.push_back({path, std::string("operator '") + conn_name(f->kind()) +
                             "' not admitted by logic " + logic_name(logic)});
  }
  if (f->kind() == Conn::Pred) {
    for (const auto& t : f->args()) {
      if (t.kind == Term::Kind::Var &&
          std::find(bound.begin(), bound.end(), t.name) == bound.end()) {
        out.push_back({path, "free variable '" + t.name + "'"});
      }
    }
  }
  if (f->kind() == Conn::Forall || f->kind() == Conn::Exists) {
    if (std::find(bound.begin(), bound.end(), f->name()) != bound.end()) {
      out.push_back({path, "shadowed variable '" + f->name() + "'"});
    }
    bound.push_back(f->name());
    check_node(f->kid(0), logic, path.empty() ? "0" : path + ".0", bound, out);
    bound.pop_back();
    return;
  }
  for (size_t i = 0; i < f->kids().size(); ++i) {
    check_node(f->kid(i), logic, path.empty() ? std::to_string(i) : path + "." + std::to_string(i),
               bound, out);
  }
}

}  // namespace

WellFormedReport well_formed(const FormulaPtr& f, LogicId logic) {
  WellFormedReport rep;
  std::vector<std::string> bound;
  check_node(f, logic, "", bound, rep.violations);
  rep.ok = rep.violations.empty();
  return rep;
}

FormulaPtr expand_duals(const FormulaPtr& f) {
  std::vector<FormulaPtr> kids;
  kids.reserve(f->kids().size());
  for (const auto& k : f->kids()) kids.push_back(expand_duals(k));
  switch (f->kind()) {
    case Conn::Perm:
      return Formula::lnot(Formula::ob(Formula::lnot(kids[0])));
    case Conn::Forb:
      return Formula::ob(Formula::lnot(kids[0]));
    case Conn::Dia:
      return Formula::lnot(Formula::box(Formula::lnot(kids[0])));
    case Conn::PermC:
      return Formula::lnot(Formula::ob_c(Formula::lnot(kids[0]), kids[1]));
    default:
      break;
  }
  if (f->kids().empty()) return f;
  return std::make_shared<Formula>(f->kind(), f->name(), f->args(), std::move(kids));
}

namespace {

FormulaPtr fold_not(FormulaPtr a) {
  if (a->is(Conn::Top)) return Formula::bot();
  if (a->is(Conn::Bot)) return Formula::top();
  return Formula::lnot(std::move(a));
}

FormulaPtr fold_and(FormulaPtr a, FormulaPtr b) {
  if (a->is(Conn::Bot) || b->is(Conn::Bot)) return Formula::bot();
  if (a->is(Conn::Top)) return b;
  if (b->is(Conn::Top)) return a;
  return Formula::land(std::move(a), std::move(b));
}

FormulaPtr fold_or(FormulaPtr a, FormulaPtr b) {
  if (a->is(Conn::Top) || b->is(Conn::Top)) return Formula::top();
  if (a->is(Conn::Bot)) return b;
  if (b->is(Conn::Bot)) return a;
  return Formula::lor(std::move(a), std::move(b));
}

FormulaPtr fold_impl(FormulaPtr a, FormulaPtr b) {
  if (a->is(Conn::Bot) || b->is(Conn::Top)) return Formula::top();
  if (a->is(Conn::Top)) return b;
  if (b->is(Conn::Bot)) return fold_not(std::move(a));
  return Formula::impl(std::move(a), std::move(b));
}

}  // namespace

FormulaPtr simplify(const FormulaPtr& f) {
  std::vector<FormulaPtr> kids;
  kids.reserve(f->kids().size());
  for (const auto& k : f->kids()) kids.push_back(simplify(k));
  switch (f->kind()) {
    case Conn::Not: return fold_not(kids[0]);
    case Conn::And: return fold_and(kids[0], kids[1]);
    case Conn::Or: return fold_or(kids[0], kids[1]);
    case Conn::Impl: return fold_impl(kids[0], kids[1]);
    case Conn::Iff:
      return fold_and(fold_impl(kids[0], kids[1]), fold_impl(kids[1], kids[0]));
    case Conn::Forall:
    case Conn::Exists:
      // Domains are non-empty (at least one constant), so a constant body folds through.
      if (kids[0]->is(Conn::Top)) return Formula::top();
      if (kids[0]->is(Conn::Bot)) return Formula::bot();
      break;
    default:
      break;
  }
  if (f->kids().empty()) return f;
  return std::make_shared<Formula>(f->kind(), f->name(), f->args(), std::move(kids));
}

FormulaPtr desugar_monadic(const FormulaPtr& f, LogicId logic) {
  if (logic != LogicId::DDLE && logic != LogicId::DDL_CJ) return f;
  std::vector<FormulaPtr> kids;
  kids.reserve(f->kids().size());
  for (const auto& k : f->kids()) kids.push_back(desugar_monadic(k, logic));
  switch (f->kind()) {
    case Conn::Ob: return Formula::ob_c(kids[0], Formula::top());
    case Conn::Perm: return Formula::perm_c(kids[0], Formula::top());
    case Conn::Forb: return Formula::ob_c(Formula::lnot(kids[0]), Formula::top());
    default:
      break;
  }
  if (f->kids().empty()) return f;
  return std::make_shared<Formula>(f->kind(), f->name(), f->args(), std::move(kids));
}

namespace {

FormulaPtr nnf_pos(const FormulaPtr& f);
FormulaPtr nnf_neg(const FormulaPtr& f);

FormulaPtr nnf_pos(const FormulaPtr& f) {
  switch (f->kind()) {
    case Conn::Not: return nnf_neg(f->kid(0));
    case Conn::And: return Formula::land(nnf_pos(f->kid(0)), nnf_pos(f->kid(1)));
    case Conn::Or: return Formula::lor(nnf_pos(f->kid(0)), nnf_pos(f->kid(1)));
    case Conn::Impl: return Formula::lor(nnf_neg(f->kid(0)), nnf_pos(f->kid(1)));
    case Conn::Iff:
      assert(false && "nnf expects Iff to be simplified away");
      return f;
    case Conn::Forall: return Formula::forall(f->name(), nnf_pos(f->kid(0)));
    case Conn::Exists: return Formula::exists(f->name(), nnf_pos(f->kid(0)));
    default:
      break;
  }
  // Atoms, constants, modal and deontic operators: normalize inside, keep the node.
  if (f->kids().empty()) return f;
  std::vector<FormulaPtr> kids;
  kids.reserve(f->kids().size());
  for (const auto& k : f->kids()) kids.push_back(nnf_pos(k));
  return std::make_shared<Formula>(f->kind(), f->name(), f->args(), std::move(kids));
}

FormulaPtr nnf_neg(const FormulaPtr& f) {
  switch (f->kind()) {
    case Conn::Not: return nnf_pos(f->kid(0));
    case Conn::And: return Formula::lor(nnf_neg(f->kid(0)), nnf_neg(f->kid(1)));
    case Conn::Or: return Formula::land(nnf_neg(f->kid(0)), nnf_neg(f->kid(1)));
    case Conn::Impl: return Formula::land(nnf_pos(f->kid(0)), nnf_neg(f->kid(1)));
    case Conn::Iff:
      assert(false && "nnf expects Iff to be simplified away");
      return f;
    case Conn::Forall: return Formula::exists(f->name(), nnf_neg(f->kid(0)));
    case Conn::Exists: return Formula::forall(f->name(), nnf_neg(f->kid(0)));
    case Conn::Top: return Formula::bot();
    case Conn::Bot: return Formula::top();
    default:
      break;
  }
  // Negation parks on atoms and modal operators.
  return Formula::lnot(nnf_pos(f));
}

}  // namespace

FormulaPtr nnf(const FormulaPtr& f) { return nnf_pos(f); }

namespace {
void collect_atoms(const FormulaPtr& f, std::set<std::string>& out) {
  if (f->kind() == Conn::Atom || f->kind() == Conn::Pred) out.insert(f->name());
  for (const auto& k : f->kids()) collect_atoms(k, out);
}
void collect_constants(const FormulaPtr& f, std::set<std::string>& out) {
  if (f->kind() == Conn::Pred) {
    for (const auto& t : f->args())
      if (t.kind == Term::Kind::Const) out.insert(t.name);
  }
  for (const auto& k : f->kids()) collect_constants(k, out);
}
}  // namespace

std::set<std::string> atoms(const FormulaPtr& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

std::set<std::string> constants(const FormulaPtr& f) {
  std::set<std::string> out;
  collect_constants(f, out);
  return out;
}

namespace {

// Printing precedence. Binary operators from loosest to tightest; quantifier bodies extend
// maximally so the quantifier itself sits below everything.
enum Prec : int {
  kPrecQuant = 0,
  kPrecIff = 1,
  kPrecImpl = 2,
  kPrecOr = 3,
  kPrecAnd = 4,
  kPrecUnary = 5,
  kPrecAtomic = 6,
};

int node_prec(const FormulaPtr& f) {
  switch (f->kind()) {
    case Conn::Iff: return kPrecIff;
    case Conn::Impl: return kPrecImpl;
    case Conn::Or: return kPrecOr;
    case Conn::And: return kPrecAnd;
    case Conn::Not:
    case Conn::Box:
    case Conn::Dia:
    case Conn::BoxA:
    case Conn::BoxP:
    case Conn::ObA:
    case Conn::ObP:
      return kPrecUnary;
    case Conn::Forall:
    case Conn::Exists:
      return kPrecQuant;
    default:
      return kPrecAtomic;
  }
}

void print(const FormulaPtr& f, int min_prec, std::string& out) {
  const int prec = node_prec(f);
  const bool paren = prec < min_prec;
  if (paren) out += '(';
  switch (f->kind()) {
    case Conn::Atom:
      out += f->name();
      break;
    case Conn::Pred: {
      out += f->name();
      out += '(';
      for (size_t i = 0; i < f->args().size(); ++i) {
        if (i) out += ", ";
        out += f->args()[i].name;
      }
      out += ')';
      break;
    }
    case Conn::Top: out += "true"; break;
    case Conn::Bot: out += "false"; break;
    case Conn::Not:
      out += '~';
      print(f->kid(0), kPrecUnary, out);
      break;
    case Conn::And:
      print(f->kid(0), kPrecAnd, out);
      out += " & ";
      print(f->kid(1), kPrecAnd + 1, out);
      break;
    case Conn::Or:
      print(f->kid(0), kPrecOr, out);
      out += " | ";
      print(f->kid(1), kPrecOr + 1, out);
      break;
    case Conn::Impl:
      print(f->kid(0), kPrecImpl + 1, out);
      out += " -> ";
      print(f->kid(1), kPrecImpl, out);
      break;
    case Conn::Iff:
      print(f->kid(0), kPrecIff + 1, out);
      out += " <-> ";
      print(f->kid(1), kPrecIff, out);
      break;
    case Conn::Forall:
    case Conn::Exists:
      out += f->is(Conn::Forall) ? "forall " : "exists ";
      out += f->name();
      out += ". ";
      print(f->kid(0), kPrecQuant, out);
      break;
    case Conn::Ob:
    case Conn::Perm:
    case Conn::Forb:
      out += f->is(Conn::Ob) ? "O(" : (f->is(Conn::Perm) ? "P(" : "F(");
      // The body is printed at conjunction level so a top-level '|' can only mean the
      // dyadic separator when parsing back.
      print(f->kid(0), kPrecAnd, out);
      out += ')';
      break;
    case Conn::ObC:
    case Conn::PermC:
      out += f->is(Conn::ObC) ? "O(" : "P(";
      print(f->kid(0), kPrecAnd, out);
      out += '|';
      print(f->kid(1), kPrecIff, out);
      out += ')';
      break;
    case Conn::Box:
    case Conn::Dia:
    case Conn::BoxA:
    case Conn::BoxP:
    case Conn::ObA:
    case Conn::ObP: {
      switch (f->kind()) {
        case Conn::Box: out += "Box "; break;
        case Conn::Dia: out += "Dia "; break;
        case Conn::BoxA: out += "BoxA "; break;
        case Conn::BoxP: out += "BoxP "; break;
        case Conn::ObA: out += "Oa "; break;
        default: out += "Op "; break;
      }
      print(f->kid(0), kPrecUnary, out);
      break;
    }
  }
  if (paren) out += ')';
}

}  // namespace

std::string pretty(const FormulaPtr& f) {
  std::string out;
  print(f, kPrecQuant, out);
  return out;
}

}  // namespace logiparam
