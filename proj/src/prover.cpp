#include "logiparam/prover.hpp"

#include <cassert>
#include <set>
#include <stdexcept>

namespace logiparam {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Entailed: return "Entailed";
    case Verdict::EntailedUpToBound: return "EntailedUpToBound";
    case Verdict::Refuted: return "Refuted";
    case Verdict::Inconsistent: return "Inconsistent";
    case Verdict::Consistent: return "Consistent";
    case Verdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

void accumulate(SolveStats& into, const SolveStats& from) {
  into.decisions += from.decisions;
  into.propagations += from.propagations;
  into.conflicts += from.conflicts;
}

// ---------------------------------------------------------------------------
// Tableau for the serial modal logic. Works on normalized input: duals expanded,
// Iff simplified away, negation normal form, so a branch only ever sees literals,
// And/Or, Ob g and ~Ob g. Each ~Ob g demands a successor satisfying ~g along with
// every obligated body; seriality demands a successor even without witnesses.

struct TreeWorld {
  std::map<std::string, bool> lits;
  std::vector<TreeWorld> succ;
  bool self_loop = false;

  int size() const {
    int n = 1;
    for (const TreeWorld& c : succ) n += c.size();
    return n;
  }
};

class KdTableau {
 public:
  explicit KdTableau(const Budget& budget) : budget_(budget) {}

  SatCheck check(std::vector<FormulaPtr> todo, TreeWorld& out) {
    return explore(std::move(todo), Branch{}, out);
  }

  SolveStats stats;

 private:
  struct Branch {
    std::map<std::string, bool> lits;
    std::vector<FormulaPtr> ob, not_ob;
  };

  SatCheck explore(std::vector<FormulaPtr> todo, Branch branch, TreeWorld& out) {
    if ((++ticks_ & 63) == 0 && budget_.exceeded()) return SatCheck::ResourceOut;
    while (!todo.empty()) {
      const FormulaPtr f = todo.back();
      todo.pop_back();
      stats.propagations++;
      switch (f->kind()) {
        case Conn::Top:
          continue;
        case Conn::Bot:
          stats.conflicts++;
          return SatCheck::Unsatisfiable;
        case Conn::Atom: {
          auto [it, inserted] = branch.lits.emplace(f->name(), true);
          if (!inserted && !it->second) {
            stats.conflicts++;
            return SatCheck::Unsatisfiable;
          }
          continue;
        }
        case Conn::And:
          todo.push_back(f->kid(0));
          todo.push_back(f->kid(1));
          continue;
        case Conn::Or: {
          stats.decisions++;
          std::vector<FormulaPtr> left = todo;
          left.push_back(f->kid(0));
          const SatCheck r = explore(std::move(left), branch, out);
          if (r != SatCheck::Unsatisfiable) return r;
          todo.push_back(f->kid(1));
          continue;
        }
        case Conn::Ob:
          branch.ob.push_back(f->kid(0));
          continue;
        case Conn::Not: {
          const FormulaPtr& g = f->kid(0);
          if (g->kind() == Conn::Atom) {
            auto [it, inserted] = branch.lits.emplace(g->name(), false);
            if (!inserted && it->second) {
              stats.conflicts++;
              return SatCheck::Unsatisfiable;
            }
            continue;
          }
          if (g->kind() == Conn::Ob) {
            branch.not_ob.push_back(g->kid(0));
            continue;
          }
          break;
        }
        default:
          break;
      }
      throw std::invalid_argument(std::string("tableau met unexpected operator '") +
                                  conn_name(f->kind()) + "'");
    }
    return successors(branch, out);
  }

  SatCheck successors(const Branch& branch, TreeWorld& out) {
    out.lits = branch.lits;
    out.succ.clear();
    out.self_loop = false;
    if (branch.not_ob.empty() && branch.ob.empty()) {
      out.self_loop = true;  // nothing constrains the successor, loop back for seriality
      return SatCheck::Satisfiable;
    }
    if (branch.not_ob.empty()) {
      TreeWorld child;
      const SatCheck r = explore(branch.ob, Branch{}, child);
      if (r != SatCheck::Satisfiable) return r;
      out.succ.push_back(std::move(child));
      return SatCheck::Satisfiable;
    }
    for (const FormulaPtr& g : branch.not_ob) {
      std::vector<FormulaPtr> todo = branch.ob;
      todo.push_back(nnf(Formula::lnot(g)));
      TreeWorld child;
      const SatCheck r = explore(std::move(todo), Branch{}, child);
      if (r != SatCheck::Satisfiable) return r;
      out.succ.push_back(std::move(child));
    }
    return SatCheck::Satisfiable;
  }

  Budget budget_;
  std::uint64_t ticks_ = 0;
};

int flatten(TreeWorld& t, KripkeModel& m) {
  const int idx = m.num_worlds++;
  m.val.push_back(std::move(t.lits));
  m.access.push_back(0);
  if (t.self_loop) m.access[idx] |= WorldSet{1} << idx;
  for (TreeWorld& c : t.succ) {
    const int ci = flatten(c, m);
    m.access[idx] |= WorldSet{1} << ci;
  }
  return idx;
}

FormulaPtr normalize_kd(const FormulaPtr& f) { return nnf(simplify(expand_duals(f))); }

}  // namespace

KdResult kd_satisfiable(const std::vector<FormulaPtr>& formulas, const Budget& budget) {
  std::vector<FormulaPtr> normalized;
  normalized.reserve(formulas.size());
  for (const FormulaPtr& f : formulas) normalized.push_back(normalize_kd(f));
  KdTableau tableau(budget);
  TreeWorld root;
  KdResult out;
  out.status = tableau.check(std::move(normalized), root);
  out.stats = tableau.stats;
  if (out.status != SatCheck::Satisfiable) return out;
  if (root.size() > 31) {
    out.status = SatCheck::ResourceOut;  // countermodel would overflow the world mask
    return out;
  }
  flatten(root, out.model);
  return out;
}

// ---------------------------------------------------------------------------
// First-order grounding.

namespace {

FormulaPtr ground_rec(const FormulaPtr& f, Grounding& g, std::map<std::string, int>& env) {
  switch (f->kind()) {
    case Conn::Pred: {
      std::vector<int> tuple;
      std::string name = f->name() + "(";
      for (size_t i = 0; i < f->args().size(); ++i) {
        const Term& t = f->args()[i];
        int idx = -1;
        if (t.kind == Term::Kind::Var) {
          auto it = env.find(t.name);
          if (it == env.end())
            throw std::invalid_argument("grounding met free variable '" + t.name + "'");
          idx = it->second;
        } else {
          for (size_t d = 0; d < g.domain.size(); ++d)
            if (g.domain[d] == t.name) idx = static_cast<int>(d);
          assert(idx >= 0 && "constant missing from its own sequent's domain");
        }
        tuple.push_back(idx);
        if (i) name += ',';
        name += g.domain[idx];
      }
      name += ')';
      g.pred_atoms.emplace(name, std::make_pair(f->name(), tuple));
      return Formula::atom(name);
    }
    case Conn::Forall:
    case Conn::Exists: {
      const bool conj = f->kind() == Conn::Forall;
      FormulaPtr acc;
      for (size_t d = 0; d < g.domain.size(); ++d) {
        env[f->name()] = static_cast<int>(d);
        FormulaPtr inst = ground_rec(f->kid(0), g, env);
        env.erase(f->name());
        acc = acc ? (conj ? Formula::land(acc, inst) : Formula::lor(acc, inst)) : inst;
      }
      return acc;
    }
    default: {
      if (f->kids().empty()) return f;
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids().size());
      for (const FormulaPtr& k : f->kids()) kids.push_back(ground_rec(k, g, env));
      return std::make_shared<Formula>(f->kind(), f->name(), f->args(), std::move(kids));
    }
  }
}

}  // namespace

Grounding ground_sequent(const std::vector<FormulaPtr>& theory, const FormulaPtr& goal) {
  std::set<std::string> consts;
  for (const FormulaPtr& f : theory) {
    const auto cs = constants(f);
    consts.insert(cs.begin(), cs.end());
  }
  if (goal) {
    const auto cs = constants(goal);
    consts.insert(cs.begin(), cs.end());
  }
  Grounding g;
  g.domain.assign(consts.begin(), consts.end());
  if (g.domain.empty()) g.domain.push_back("d0");  // quantifiers need something to range over
  std::map<std::string, int> env;
  for (const FormulaPtr& f : theory) g.theory.push_back(simplify(ground_rec(f, g, env)));
  if (goal) g.goal = simplify(ground_rec(goal, g, env));
  return g;
}

namespace {

FolInterp decode_interp(const Grounding& g, const TseitinResult& ts,
                        const std::vector<bool>& assignment) {
  FolInterp m;
  m.domain = g.domain;
  for (const auto& [f, var] : ts.var_of) {
    if (f->kind() != Conn::Atom) continue;
    const auto it = g.pred_atoms.find(f->name());
    if (it == g.pred_atoms.end()) {
      m.props[f->name()] = assignment[var];
    } else if (assignment[var]) {
      m.rel[it->second.first].insert(it->second.second);
    }
  }
  return m;
}

Certificate check_fol(const std::vector<FormulaPtr>& theory, const FormulaPtr& goal,
                      const Budget& budget) {
  Certificate cert;
  Grounding g = ground_sequent(theory, goal);
  FormulaPtr conj;
  for (const FormulaPtr& f : g.theory) conj = conj ? Formula::land(conj, f) : f;
  if (g.goal) {
    const FormulaPtr neg = simplify(Formula::lnot(g.goal));
    conj = conj ? Formula::land(conj, neg) : neg;
  }
  if (!conj) {
    // nothing asserted at all: the all-false interpretation does
    cert.verdict = Verdict::Consistent;
    cert.has_model = true;
    cert.model = FolInterp{g.domain, {}, {}};
    cert.detail = "no assertions";
    return cert;
  }
  const TseitinResult ts = tseitin(conj);
  const SolveResult solved = solve(ts.cnf, budget);
  cert.stats = solved.stats;
  if (solved.status == SatStatus::Timeout) {
    cert.verdict = Verdict::Unknown;
    cert.detail = "solver budget exhausted";
    return cert;
  }
  if (solved.status == SatStatus::Sat) {
    cert.has_model = true;
    cert.model = decode_interp(g, ts, solved.assignment);
    // Confirm against the original sequent, quantifiers and all, so a bad
    // grounding cannot slip through either.
    bool confirmed = true;
    const auto& interp = std::get<FolInterp>(cert.model);
    for (const FormulaPtr& f : theory) confirmed = confirmed && eval_fol(interp, f);
    if (goal) confirmed = confirmed && !eval_fol(interp, goal);
    if (!confirmed) {
      assert(false && "decoded interpretation disagrees with the evaluator");
      cert.verdict = Verdict::Unknown;
      cert.detail = "internal decoding mismatch";
      return cert;
    }
    cert.verdict = goal ? Verdict::Refuted : Verdict::Consistent;
    cert.detail = goal ? "counter-interpretation over " + std::to_string(g.domain.size()) +
                             (g.domain.size() == 1 ? " element" : " elements")
                       : "witness interpretation found";
    return cert;
  }
  cert.verdict = goal ? Verdict::Entailed : Verdict::Inconsistent;
  cert.detail = goal ? "no counter-interpretation over the declared constants"
                     : "ground theory is unsatisfiable";
  return cert;
}

Certificate check_kd(const std::vector<FormulaPtr>& theory, const FormulaPtr& goal,
                     const Budget& budget) {
  Certificate cert;
  std::vector<FormulaPtr> assertions = theory;
  if (goal) assertions.push_back(Formula::lnot(goal));
  KdResult r = kd_satisfiable(assertions, budget);
  cert.stats = r.stats;
  if (r.status == SatCheck::ResourceOut) {
    cert.verdict = Verdict::Unknown;
    cert.detail = "tableau budget exhausted";
    return cert;
  }
  if (r.status == SatCheck::Satisfiable) {
    cert.has_model = true;
    cert.worlds_checked = r.model.num_worlds;
    cert.model = std::move(r.model);
    cert.verdict = goal ? Verdict::Refuted : Verdict::Consistent;
    cert.detail = (goal ? "countermodel with " : "witness model with ") +
                  std::to_string(cert.worlds_checked) +
                  (cert.worlds_checked == 1 ? " world" : " worlds");
    return cert;
  }
  cert.verdict = goal ? Verdict::Entailed : Verdict::Inconsistent;
  cert.detail = "closed tableau";
  return cert;
}

Certificate check_bounded(LogicId logic, const std::vector<FormulaPtr>& theory,
                          const FormulaPtr& goal, const ProverOptions& opts,
                          const Budget& budget) {
  Certificate cert;
  const int max_k = opts.max_worlds(logic);
  for (int k = 1; k <= max_k; ++k) {
    if (budget.exceeded()) {
      cert.verdict = Verdict::Unknown;
      cert.detail = "budget exhausted after " + std::to_string(k - 1) + " bounds";
      return cert;
    }
    BoundedSearchResult r = find_model(logic, theory, goal, k, true, budget);
    accumulate(cert.stats, r.stats);
    cert.worlds_checked = k;
    if (r.status == SatStatus::Timeout) {
      cert.verdict = Verdict::Unknown;
      cert.detail = "solver budget exhausted at bound " + std::to_string(k);
      return cert;
    }
    if (r.status == SatStatus::Sat) {
      if (!r.confirmed) {
        cert.verdict = Verdict::Unknown;
        cert.detail = "internal decoding mismatch";
        return cert;
      }
      cert.has_model = true;
      cert.model = std::move(r.model);
      cert.verdict = goal ? Verdict::Refuted : Verdict::Consistent;
      cert.detail = (goal ? "countermodel with " : "witness model with ") + std::to_string(k) +
                    (k == 1 ? " world" : " worlds");
      return cert;
    }
  }
  cert.bound_limited = true;
  cert.verdict = goal ? Verdict::EntailedUpToBound : Verdict::Inconsistent;
  cert.detail = (goal ? "no countermodel with at most " : "no model with at most ") +
                std::to_string(max_k) + " worlds";
  return cert;
}

Certificate dispatch(LogicId logic, const std::vector<FormulaPtr>& theory,
                     const FormulaPtr& goal, const ProverOptions& opts, const Budget& outer) {
  const Budget budget = Budget::earlier(outer, Budget::from_ms(opts.check_budget_ms));
  switch (logic) {
    case LogicId::FOL: return check_fol(theory, goal, budget);
    case LogicId::KD: return check_kd(theory, goal, budget);
    default: return check_bounded(logic, theory, goal, opts, budget);
  }
}

}  // namespace

Certificate check_consistency(LogicId logic, const std::vector<FormulaPtr>& theory,
                              const ProverOptions& opts, const Budget& budget) {
  return dispatch(logic, theory, nullptr, opts, budget);
}

Certificate check_entailment(LogicId logic, const std::vector<FormulaPtr>& theory,
                             const FormulaPtr& goal, const ProverOptions& opts,
                             const Budget& budget) {
  if (!goal) throw std::invalid_argument("entailment check needs a goal");
  return dispatch(logic, theory, goal, opts, budget);
}

ChainReport locate_failed_step(LogicId logic, const std::vector<FormulaPtr>& theory,
                               const std::vector<FormulaPtr>& steps, const FormulaPtr& goal,
                               const ProverOptions& opts, const Budget& budget) {
  ChainReport out;
  std::vector<FormulaPtr> context = theory;
  for (size_t i = 0; i < steps.size(); ++i) {
    StepResult sr;
    sr.index = static_cast<int>(i);
    sr.cert = check_entailment(logic, context, steps[i], opts, budget);
    const Verdict v = sr.cert.verdict;
    out.steps.push_back(std::move(sr));
    if (v != Verdict::Entailed && v != Verdict::EntailedUpToBound) {
      out.failed_index = static_cast<int>(i);
      return out;
    }
    context.push_back(steps[i]);
  }
  StepResult last;
  last.index = static_cast<int>(steps.size());
  last.is_hypothesis = true;
  last.cert = check_entailment(logic, context, goal, opts, budget);
  const Verdict v = last.cert.verdict;
  out.steps.push_back(std::move(last));
  if (v == Verdict::Entailed || v == Verdict::EntailedUpToBound) {
    out.all_entailed = true;
  } else {
    out.failed_index = static_cast<int>(steps.size());
  }
  return out;
}

}  // namespace logiparam
