#include "logiparam/models.hpp"

#include <sstream>
#include <stdexcept>

namespace logiparam {

namespace {

WorldSet full_mask(int num_worlds) { return (WorldSet{1} << num_worlds) - 1; }

bool subset(WorldSet a, WorldSet b) { return (a & ~b) == 0; }

void append_valuation_rows(std::ostringstream& os,
                           const std::vector<std::map<std::string, bool>>& val) {
  std::set<std::string> atoms;
  for (const auto& row : val)
    for (const auto& [name, truth] : row) atoms.insert(name);
  for (size_t w = 0; w < val.size(); ++w) {
    os << "  w" << w << ':';
    if (atoms.empty()) {
      os << " (no atoms)";
    } else {
      for (const auto& name : atoms) {
        auto it = val[w].find(name);
        const bool truth = it != val[w].end() && it->second;
        os << ' ' << name << '=' << (truth ? "true" : "false");
      }
    }
    os << '\n';
  }
}

[[noreturn]] void reject_operator(const char* flavor, Conn kind) {
  throw std::invalid_argument(std::string(flavor) + " model has no reading for operator '" +
                              conn_name(kind) + "'");
}

}  // namespace

std::string world_set_to_string(WorldSet s, int num_worlds) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int w = 0; w < num_worlds; ++w) {
    if (s & (WorldSet{1} << w)) {
      if (!first) os << ',';
      os << 'w' << w;
      first = false;
    }
  }
  os << '}';
  return os.str();
}

bool KripkeModel::atom_true(int w, const std::string& name) const {
  auto it = val[w].find(name);
  return it != val[w].end() && it->second;
}

std::vector<std::string> KripkeModel::validate(bool require_serial) const {
  std::vector<std::string> out;
  if (num_worlds <= 0) out.push_back("model has no worlds");
  if (static_cast<int>(access.size()) != num_worlds) out.push_back("access table size mismatch");
  if (static_cast<int>(val.size()) != num_worlds) out.push_back("valuation table size mismatch");
  if (!out.empty()) return out;
  const WorldSet full = full_mask(num_worlds);
  for (int w = 0; w < num_worlds; ++w) {
    if (access[w] & ~full)
      out.push_back("w" + std::to_string(w) + " sees a world outside the model");
    if (require_serial && access[w] == 0)
      out.push_back("w" + std::to_string(w) + " has no successor");
  }
  return out;
}

std::string KripkeModel::dump() const {
  std::ostringstream os;
  os << "Kripke model with " << num_worlds << (num_worlds == 1 ? " world\n" : " worlds\n");
  append_valuation_rows(os, val);
  for (int w = 0; w < num_worlds; ++w)
    os << "  w" << w << " sees " << world_set_to_string(access[w], num_worlds) << '\n';
  return os.str();
}

bool PreferenceModel::atom_true(int w, const std::string& name) const {
  auto it = val[w].find(name);
  return it != val[w].end() && it->second;
}

std::vector<std::string> PreferenceModel::validate() const {
  std::vector<std::string> out;
  if (num_worlds <= 0) out.push_back("model has no worlds");
  if (static_cast<int>(better.size()) != num_worlds)
    out.push_back("betterness table size mismatch");
  if (static_cast<int>(val.size()) != num_worlds) out.push_back("valuation table size mismatch");
  if (!out.empty()) return out;
  const WorldSet full = full_mask(num_worlds);
  for (int w = 0; w < num_worlds; ++w) {
    if (better[w] & ~full)
      out.push_back("w" + std::to_string(w) + " compares against a world outside the model");
    if (!(better[w] & (WorldSet{1} << w)))
      out.push_back("betterness not reflexive at w" + std::to_string(w));
  }
  for (int w = 0; w < num_worlds; ++w) {
    for (int v = 0; v < num_worlds; ++v) {
      const bool wv = better[w] & (WorldSet{1} << v);
      const bool vw = better[v] & (WorldSet{1} << w);
      if (!wv && !vw)
        out.push_back("betterness not total between w" + std::to_string(w) + " and w" +
                      std::to_string(v));
      if (wv && (better[v] & ~better[w]))
        out.push_back("betterness not transitive through w" + std::to_string(w) + " over w" +
                      std::to_string(v));
    }
  }
  return out;
}

WorldSet PreferenceModel::best(WorldSet s) const {
  WorldSet out = 0;
  for (int w = 0; w < num_worlds; ++w) {
    if (!(s & (WorldSet{1} << w))) continue;
    if (subset(s, better[w])) out |= WorldSet{1} << w;
  }
  return out;
}

std::string PreferenceModel::dump() const {
  std::ostringstream os;
  os << "preference model with " << num_worlds << (num_worlds == 1 ? " world\n" : " worlds\n");
  append_valuation_rows(os, val);
  for (int w = 0; w < num_worlds; ++w)
    os << "  w" << w << " at-least-as-good-as " << world_set_to_string(better[w], num_worlds)
       << '\n';
  return os.str();
}

bool CJModel::atom_true(int w, const std::string& name) const {
  auto it = val[w].find(name);
  return it != val[w].end() && it->second;
}

bool CJModel::ob_contains(WorldSet context, WorldSet member) const {
  return ob.count({context, member}) > 0;
}

void CJModel::close_ob_under_context_equivalence() {
  const WorldSet full = full_mask(num_worlds);
  const auto seed = ob;
  for (const auto& [context, member] : seed) {
    for (WorldSet z = 0; z <= full; ++z) {
      if ((z & context) == (member & context)) ob.insert({context, z});
    }
  }
}

const std::array<ObRule, 5>& ob_rules() {
  static const std::array<ObRule, 5> rules = {{
      {"empty set is never obligatory", 1,
       [](WorldSet, WorldSet, WorldSet, WorldSet) { return true; },
       0,
       {{{nullptr, nullptr}, {nullptr, nullptr}}},
       {[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
        [](WorldSet, WorldSet, WorldSet, WorldSet) { return WorldSet{0}; }},
       false},
      {"sets agreeing on the context share status", 3,
       [](WorldSet x, WorldSet y, WorldSet z, WorldSet) { return (y & x) == (z & x); },
       1,
       {{{[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
          [](WorldSet, WorldSet y, WorldSet, WorldSet) { return y; }},
         {nullptr, nullptr}}},
       {[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
        [](WorldSet, WorldSet, WorldSet z, WorldSet) { return z; }},
       true},
      {"compatible obligations compose", 3,
       [](WorldSet x, WorldSet y, WorldSet z, WorldSet) { return (y & z & x) != 0; },
       2,
       {{{[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
          [](WorldSet, WorldSet y, WorldSet, WorldSet) { return y; }},
         {[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
          [](WorldSet, WorldSet, WorldSet z, WorldSet) { return z; }}}},
       {[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
        [](WorldSet, WorldSet y, WorldSet z, WorldSet) { return y & z; }},
       true},
      {"obligations persist into wider contexts", 3,
       [](WorldSet x, WorldSet y, WorldSet z, WorldSet) {
         return subset(y, x) && subset(x, z);
       },
       1,
       {{{[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
          [](WorldSet, WorldSet y, WorldSet, WorldSet) { return y; }},
         {nullptr, nullptr}}},
       {[](WorldSet, WorldSet, WorldSet z, WorldSet) { return z; },
        [](WorldSet x, WorldSet y, WorldSet z, WorldSet) { return (z & ~x) | y; }},
       true},
      {"obligations persist into compatible narrower contexts", 3,
       [](WorldSet x, WorldSet y, WorldSet z, WorldSet) {
         return subset(y, x) && (y & z) != 0;
       },
       1,
       {{{[](WorldSet x, WorldSet, WorldSet, WorldSet) { return x; },
          [](WorldSet, WorldSet, WorldSet z, WorldSet) { return z; }},
         {nullptr, nullptr}}},
       {[](WorldSet, WorldSet y, WorldSet, WorldSet) { return y; },
        [](WorldSet, WorldSet, WorldSet z, WorldSet) { return z; }},
       true},
  }};
  return rules;
}

std::vector<std::string> CJModel::validate() const {
  std::vector<std::string> out;
  if (num_worlds <= 0) out.push_back("model has no worlds");
  if (static_cast<int>(av.size()) != num_worlds) out.push_back("av table size mismatch");
  if (static_cast<int>(pv.size()) != num_worlds) out.push_back("pv table size mismatch");
  if (static_cast<int>(val.size()) != num_worlds) out.push_back("valuation table size mismatch");
  if (!out.empty()) return out;
  const WorldSet full = full_mask(num_worlds);
  for (int w = 0; w < num_worlds; ++w) {
    if ((av[w] | pv[w]) & ~full)
      out.push_back("w" + std::to_string(w) + " has versions outside the model");
    if (av[w] == 0) out.push_back("w" + std::to_string(w) + " has no actual versions");
    if (!subset(av[w], pv[w]))
      out.push_back("actual versions of w" + std::to_string(w) + " exceed its potential ones");
    if (!(pv[w] & (WorldSet{1} << w)))
      out.push_back("w" + std::to_string(w) + " is not a potential version of itself");
  }
  for (const auto& [context, member] : ob) {
    if ((context | member) & ~full) out.push_back("ob mentions a world outside the model");
  }
  for (const ObRule& rule : ob_rules()) {
    const WorldSet y_top = rule.arity >= 2 ? full : 0;
    const WorldSet z_top = rule.arity >= 3 ? full : 0;
    for (WorldSet x = 0; x <= full; ++x) {
      for (WorldSet y = 0; y <= y_top; ++y) {
        for (WorldSet z = 0; z <= z_top; ++z) {
          if (!rule.guard(x, y, z, full)) continue;
          bool premises_hold = true;
          for (int i = 0; i < rule.num_premises; ++i) {
            const ObMembership& p = rule.premises[i];
            if (!ob_contains(p.context(x, y, z, full), p.member(x, y, z, full))) {
              premises_hold = false;
              break;
            }
          }
          if (!premises_hold) continue;
          const WorldSet cc = rule.conclusion.context(x, y, z, full);
          const WorldSet cm = rule.conclusion.member(x, y, z, full);
          if (ob_contains(cc, cm) != rule.conclusion_in_ob) {
            out.push_back(std::string("ob rule '") + rule.name + "' violated at X=" +
                          world_set_to_string(x, num_worlds) + " Y=" +
                          world_set_to_string(y, num_worlds) + " Z=" +
                          world_set_to_string(z, num_worlds));
          }
        }
      }
    }
  }
  return out;
}

std::string CJModel::dump() const {
  std::ostringstream os;
  os << "actual/potential model with " << num_worlds
     << (num_worlds == 1 ? " world\n" : " worlds\n");
  append_valuation_rows(os, val);
  for (int w = 0; w < num_worlds; ++w)
    os << "  av(w" << w << ")=" << world_set_to_string(av[w], num_worlds) << " pv(w" << w
       << ")=" << world_set_to_string(pv[w], num_worlds) << '\n';
  os << "  ob:";
  if (ob.empty()) os << " (empty)";
  for (const auto& [context, member] : ob)
    os << ' ' << world_set_to_string(context, num_worlds) << "->"
       << world_set_to_string(member, num_worlds);
  os << '\n';
  return os.str();
}

int FolInterp::element(const std::string& constant) const {
  for (size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == constant) return static_cast<int>(i);
  return -1;
}

std::string FolInterp::dump() const {
  std::ostringstream os;
  os << "interpretation over domain {";
  for (size_t i = 0; i < domain.size(); ++i) os << (i ? "," : "") << domain[i];
  os << "}\n";
  for (const auto& [name, truth] : props)
    os << "  " << name << '=' << (truth ? "true" : "false") << '\n';
  for (const auto& [name, tuples] : rel) {
    os << "  " << name << ':';
    if (tuples.empty()) os << " (empty)";
    for (const auto& tuple : tuples) {
      os << " (";
      for (size_t i = 0; i < tuple.size(); ++i)
        os << (i ? "," : "") << domain[tuple[i]];
      os << ')';
    }
    os << '\n';
  }
  return os.str();
}

namespace {

template <typename ModelT>
WorldSet truth_set(const ModelT& m, const FormulaPtr& f) {
  WorldSet out = 0;
  for (int w = 0; w < m.num_worlds; ++w)
    if (eval(m, w, f)) out |= WorldSet{1} << w;
  return out;
}

template <typename ModelT>
bool eval_boolean(const ModelT& m, int world, const FormulaPtr& f, bool& out) {
  switch (f->kind()) {
    case Conn::Atom: out = m.atom_true(world, f->name()); return true;
    case Conn::Top: out = true; return true;
    case Conn::Bot: out = false; return true;
    case Conn::Not: out = !eval(m, world, f->kid(0)); return true;
    case Conn::And: out = eval(m, world, f->kid(0)) && eval(m, world, f->kid(1)); return true;
    case Conn::Or: out = eval(m, world, f->kid(0)) || eval(m, world, f->kid(1)); return true;
    case Conn::Impl: out = !eval(m, world, f->kid(0)) || eval(m, world, f->kid(1)); return true;
    case Conn::Iff: out = eval(m, world, f->kid(0)) == eval(m, world, f->kid(1)); return true;
    default: return false;
  }
}

}  // namespace

bool eval(const KripkeModel& m, int world, const FormulaPtr& f) {
  bool out = false;
  if (eval_boolean(m, world, f, out)) return out;
  switch (f->kind()) {
    case Conn::Ob:
    case Conn::Perm:
    case Conn::Forb: {
      const bool want = f->kind() != Conn::Forb;  // prohibition requires the body to fail
      for (int v = 0; v < m.num_worlds; ++v) {
        if (!(m.access[world] & (WorldSet{1} << v))) continue;
        const bool body = eval(m, v, f->kid(0));
        if (f->kind() == Conn::Perm) {
          if (body) return true;
        } else if (body != want) {
          return false;
        }
      }
      return f->kind() != Conn::Perm;
    }
    default:
      reject_operator("Kripke", f->kind());
  }
}

bool eval(const PreferenceModel& m, int world, const FormulaPtr& f) {
  bool out = false;
  if (eval_boolean(m, world, f, out)) return out;
  const WorldSet full = full_mask(m.num_worlds);
  switch (f->kind()) {
    case Conn::Box: return truth_set(m, f->kid(0)) == full;
    case Conn::Dia: return truth_set(m, f->kid(0)) != 0;
    case Conn::Ob: return subset(m.best(full), truth_set(m, f->kid(0)));
    case Conn::Perm: return (m.best(full) & truth_set(m, f->kid(0))) != 0;
    case Conn::Forb: return (m.best(full) & truth_set(m, f->kid(0))) == 0;
    case Conn::ObC:
      return subset(m.best(truth_set(m, f->kid(1))), truth_set(m, f->kid(0)));
    case Conn::PermC:
      return (m.best(truth_set(m, f->kid(1))) & truth_set(m, f->kid(0))) != 0;
    default:
      reject_operator("preference", f->kind());
  }
}

bool eval(const CJModel& m, int world, const FormulaPtr& f) {
  bool out = false;
  if (eval_boolean(m, world, f, out)) return out;
  const WorldSet full = full_mask(m.num_worlds);
  switch (f->kind()) {
    case Conn::Box: return truth_set(m, f->kid(0)) == full;
    case Conn::Dia: return truth_set(m, f->kid(0)) != 0;
    case Conn::BoxA: return subset(m.av[world], truth_set(m, f->kid(0)));
    case Conn::BoxP: return subset(m.pv[world], truth_set(m, f->kid(0)));
    case Conn::ObA: {
      const WorldSet ts = truth_set(m, f->kid(0));
      return m.ob_contains(m.av[world], ts) && !subset(m.av[world], ts);
    }
    case Conn::ObP: {
      const WorldSet ts = truth_set(m, f->kid(0));
      return m.ob_contains(m.pv[world], ts) && !subset(m.pv[world], ts);
    }
    case Conn::ObC:
      return m.ob_contains(truth_set(m, f->kid(1)), truth_set(m, f->kid(0)));
    case Conn::PermC:
      return !m.ob_contains(truth_set(m, f->kid(1)), full & ~truth_set(m, f->kid(0)));
    case Conn::Ob: return m.ob_contains(full, truth_set(m, f->kid(0)));
    case Conn::Perm: return !m.ob_contains(full, full & ~truth_set(m, f->kid(0)));
    case Conn::Forb: return m.ob_contains(full, full & ~truth_set(m, f->kid(0)));
    default:
      reject_operator("actual/potential", f->kind());
  }
}

namespace {

bool eval_fol_rec(const FolInterp& m, const FormulaPtr& f, std::map<std::string, int>& env) {
  switch (f->kind()) {
    case Conn::Atom: {
      auto it = m.props.find(f->name());
      return it != m.props.end() && it->second;
    }
    case Conn::Pred: {
      std::vector<int> tuple;
      tuple.reserve(f->args().size());
      for (const Term& t : f->args()) {
        if (t.kind == Term::Kind::Var) {
          auto it = env.find(t.name);
          if (it == env.end())
            throw std::invalid_argument("unbound variable '" + t.name + "' in evaluation");
          tuple.push_back(it->second);
        } else {
          const int e = m.element(t.name);
          if (e < 0)
            throw std::invalid_argument("constant '" + t.name + "' is outside the domain");
          tuple.push_back(e);
        }
      }
      auto it = m.rel.find(f->name());
      return it != m.rel.end() && it->second.count(tuple) > 0;
    }
    case Conn::Top: return true;
    case Conn::Bot: return false;
    case Conn::Not: return !eval_fol_rec(m, f->kid(0), env);
    case Conn::And: return eval_fol_rec(m, f->kid(0), env) && eval_fol_rec(m, f->kid(1), env);
    case Conn::Or: return eval_fol_rec(m, f->kid(0), env) || eval_fol_rec(m, f->kid(1), env);
    case Conn::Impl: return !eval_fol_rec(m, f->kid(0), env) || eval_fol_rec(m, f->kid(1), env);
    case Conn::Iff: return eval_fol_rec(m, f->kid(0), env) == eval_fol_rec(m, f->kid(1), env);
    case Conn::Forall:
    case Conn::Exists: {
      const bool is_forall = f->kind() == Conn::Forall;
      for (size_t i = 0; i < m.domain.size(); ++i) {
        env[f->name()] = static_cast<int>(i);
        const bool body = eval_fol_rec(m, f->kid(0), env);
        env.erase(f->name());
        if (body != is_forall) return !is_forall;
      }
      return is_forall;
    }
    default:
      reject_operator("first-order", f->kind());
  }
}

}  // namespace

bool eval_fol(const FolInterp& m, const FormulaPtr& f) {
  std::map<std::string, int> env;
  return eval_fol_rec(m, f, env);
}

bool eval(const Model& m, int world, const FormulaPtr& f) {
  return std::visit(
      [&](const auto& concrete) {
        if constexpr (std::is_same_v<std::decay_t<decltype(concrete)>, FolInterp>)
          return eval_fol(concrete, f);
        else
          return eval(concrete, world, f);
      },
      m);
}

bool holds_globally(const Model& m, const FormulaPtr& f) {
  const int worlds = model_world_count(m);
  for (int w = 0; w < worlds; ++w)
    if (!eval(m, w, f)) return false;
  return true;
}

std::string dump_model(const Model& m) {
  return std::visit([](const auto& concrete) { return concrete.dump(); }, m);
}

int model_world_count(const Model& m) {
  return std::visit(
      [](const auto& concrete) {
        if constexpr (std::is_same_v<std::decay_t<decltype(concrete)>, FolInterp>)
          return 1;
        else
          return concrete.num_worlds;
      },
      m);
}

}  // namespace logiparam
