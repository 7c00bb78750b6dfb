#include "logiparam/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace logiparam {

void Cnf::add_clause(Clause c) {
  std::sort(c.begin(), c.end(), [](int a, int b) {
    const int va = std::abs(a), vb = std::abs(b);
    return va != vb ? va < vb : a < b;
  });
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (size_t i = 0; i + 1 < c.size(); ++i) {
    if (c[i] == -c[i + 1]) return;  // tautology, always satisfied
  }
  for (int lit : c) num_vars = std::max(num_vars, std::abs(lit));
  if (c.empty()) has_empty_clause = true;
  clauses.push_back(std::move(c));
}

bool verify_assignment(const Cnf& cnf, const std::vector<bool>& assignment) {
  if (static_cast<int>(assignment.size()) < cnf.num_vars + 1) return false;
  for (const Clause& c : cnf.clauses) {
    bool sat = false;
    for (int lit : c) {
      if (assignment[std::abs(lit)] == (lit > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace {

struct TrailEntry {
  int var;
  bool decision;
  bool flipped;  // both polarities tried at this decision point
};

// DPLL over occurrence lists. Propagation rescans the clauses whose literal just became
// false; clause status is derived from the assignment alone, so backtracking only needs to
// unassign variables. Deliberately simple; the CNFs this engine produces are small.
class Dpll {
 public:
  Dpll(const Cnf& cnf, const Budget& budget) : cnf_(cnf), budget_(budget) {
    const int n = cnf.num_vars;
    value_.assign(n + 1, -1);
    occ_.assign(n + 1, 0);
    occ_clauses_.assign(2 * (n + 1), {});
    for (size_t ci = 0; ci < cnf.clauses.size(); ++ci) {
      for (int lit : cnf.clauses[ci]) {
        occ_[std::abs(lit)]++;
        occ_clauses_[slot(lit)].push_back(ci);
      }
    }
  }

  SolveResult run() {
    SolveResult res;
    if (cnf_.has_empty_clause) {
      res.status = SatStatus::Unsat;
      return res;
    }
    bool ok = true;
    for (const Clause& c : cnf_.clauses) {
      if (c.size() == 1 && !assign(std::abs(c[0]), c[0] > 0, false)) {
        ok = false;
        break;
      }
    }
    if (!ok || !propagate()) {
      if (!backtrack_and_propagate()) {
        res.status = SatStatus::Unsat;
        res.stats = stats_;
        return res;
      }
    }
    for (;;) {
      if ((++ticks_ & 0xff) == 0 && budget_.exceeded()) {
        res.status = SatStatus::Timeout;
        res.stats = stats_;
        return res;
      }
      const int var = pick_branch();
      if (var == 0) {
        res.assignment.assign(cnf_.num_vars + 1, false);
        for (int v = 1; v <= cnf_.num_vars; ++v) res.assignment[v] = value_[v] == 1;
        res.stats = stats_;
        // A model must survive the independent verifier before we report Sat.
        if (verify_assignment(cnf_, res.assignment)) {
          res.status = SatStatus::Sat;
        } else {
          assert(false && "dpll produced a non-model");
          res.status = SatStatus::Unsat;
          res.assignment.clear();
        }
        return res;
      }
      stats_.decisions++;
      assign(var, true, true);
      if (!propagate() && !backtrack_and_propagate()) {
        res.status = SatStatus::Unsat;
        res.stats = stats_;
        return res;
      }
    }
  }

 private:
  static size_t slot(int lit) { return 2 * std::abs(lit) + (lit > 0 ? 0 : 1); }

  int lit_value(int lit) const {
    const int v = value_[std::abs(lit)];
    if (v < 0) return -1;
    return (v == 1) == (lit > 0) ? 1 : 0;
  }

  bool assign(int var, bool val, bool decision) {
    if (value_[var] >= 0) return value_[var] == (val ? 1 : 0);
    value_[var] = val ? 1 : 0;
    trail_.push_back({var, decision, false});
    pending_.push_back(var);
    return true;
  }

  bool propagate() {
    while (!pending_.empty()) {
      const int var = pending_.back();
      pending_.pop_back();
      const int false_lit = value_[var] == 1 ? -var : var;
      for (size_t ci : occ_clauses_[slot(false_lit)]) {
        stats_.propagations++;
        const Clause& c = cnf_.clauses[ci];
        int unassigned_lit = 0;
        int unassigned_count = 0;
        bool satisfied = false;
        for (int lit : c) {
          const int lv = lit_value(lit);
          if (lv == 1) {
            satisfied = true;
            break;
          }
          if (lv == -1) {
            unassigned_lit = lit;
            if (++unassigned_count > 1) break;  // neither unit nor conflicting
          }
        }
        if (satisfied || unassigned_count > 1) continue;
        if (unassigned_count == 0) {
          stats_.conflicts++;
          pending_.clear();
          return false;
        }
        if (!assign(std::abs(unassigned_lit), unassigned_lit > 0, false)) {
          stats_.conflicts++;
          pending_.clear();
          return false;
        }
      }
    }
    return true;
  }

  // Unwind to the most recent decision whose other polarity is untried, flip it, and
  // re-propagate; repeat while the flip immediately conflicts again.
  bool backtrack_and_propagate() {
    for (;;) {
      pending_.clear();
      bool flipped = false;
      while (!trail_.empty()) {
        TrailEntry e = trail_.back();
        trail_.pop_back();
        const bool was_true = value_[e.var] == 1;
        value_[e.var] = -1;
        if (e.decision && !e.flipped) {
          value_[e.var] = was_true ? 0 : 1;
          trail_.push_back({e.var, true, true});
          pending_.push_back(e.var);
          flipped = true;
          break;
        }
      }
      if (!flipped) return false;
      if (propagate()) return true;
    }
  }

  int pick_branch() const {
    int best = 0, best_occ = -1;
    for (int v = 1; v <= cnf_.num_vars; ++v) {
      if (value_[v] < 0 && occ_[v] > best_occ) {
        best = v;
        best_occ = occ_[v];
      }
    }
    return best;
  }

  const Cnf& cnf_;
  Budget budget_;
  std::vector<int> value_;  // -1 unassigned, 0 false, 1 true
  std::vector<int> occ_;
  std::vector<std::vector<size_t>> occ_clauses_;
  std::vector<TrailEntry> trail_;
  std::vector<int> pending_;
  SolveStats stats_;
  std::uint64_t ticks_ = 0;
};

}  // namespace

SolveResult solve(const Cnf& cnf, const Budget& budget) {
  Dpll dpll(cnf, budget);
  return dpll.run();
}

namespace {

int tseitin_node(const FormulaPtr& f, TseitinResult& out,
                 std::unordered_map<std::string, int>& atom_var) {
  auto found = out.var_of.find(f);
  if (found != out.var_of.end()) return found->second;
  int var = 0;
  switch (f->kind()) {
    case Conn::Atom: {
      auto it = atom_var.find(f->name());
      if (it != atom_var.end()) {
        var = it->second;
      } else {
        var = out.cnf.fresh_var();
        atom_var.emplace(f->name(), var);
      }
      break;
    }
    case Conn::Top:
    case Conn::Bot: {
      var = out.cnf.fresh_var();
      out.cnf.add_clause({f->kind() == Conn::Top ? var : -var});
      break;
    }
    case Conn::Not: {
      const int a = tseitin_node(f->kid(0), out, atom_var);
      var = out.cnf.fresh_var();
      out.cnf.add_clause({var, a});
      out.cnf.add_clause({-var, -a});
      break;
    }
    case Conn::And: {
      const int a = tseitin_node(f->kid(0), out, atom_var);
      const int b = tseitin_node(f->kid(1), out, atom_var);
      var = out.cnf.fresh_var();
      out.cnf.add_clause({-var, a});
      out.cnf.add_clause({-var, b});
      out.cnf.add_clause({var, -a, -b});
      break;
    }
    case Conn::Or: {
      const int a = tseitin_node(f->kid(0), out, atom_var);
      const int b = tseitin_node(f->kid(1), out, atom_var);
      var = out.cnf.fresh_var();
      out.cnf.add_clause({-var, a, b});
      out.cnf.add_clause({var, -a});
      out.cnf.add_clause({var, -b});
      break;
    }
    case Conn::Impl: {
      const int a = tseitin_node(f->kid(0), out, atom_var);
      const int b = tseitin_node(f->kid(1), out, atom_var);
      var = out.cnf.fresh_var();
      out.cnf.add_clause({-var, -a, b});
      out.cnf.add_clause({var, a});
      out.cnf.add_clause({var, -b});
      break;
    }
    default:
      throw std::invalid_argument(std::string("tseitin: node '") + conn_name(f->kind()) +
                                  "' is not propositional");
  }
  out.var_of.emplace(f, var);
  return var;
}

}  // namespace

TseitinResult tseitin(const FormulaPtr& f) {
  TseitinResult out;
  std::unordered_map<std::string, int> atom_var;
  out.root_var = tseitin_node(f, out, atom_var);
  out.cnf.add_clause({out.root_var});
  return out;
}

std::string dimacs_export(const Cnf& cnf) {
  std::ostringstream os;
  os << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const Clause& c : cnf.clauses) {
    for (int lit : c) os << lit << ' ';
    os << "0\n";
  }
  return os.str();
}

Cnf dimacs_import(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  int declared_vars = -1;
  long declared_clauses = -1;
  Cnf cnf;
  Clause current;
  while (is >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    if (tok == "p") {
      std::string fmt;
      if (!(is >> fmt >> declared_vars >> declared_clauses) || fmt != "cnf")
        throw std::invalid_argument("dimacs: malformed problem line");
      continue;
    }
    char* endp = nullptr;
    const long lit = std::strtol(tok.c_str(), &endp, 10);
    if (endp == tok.c_str() || *endp != '\0')
      throw std::invalid_argument("dimacs: unexpected token '" + tok + "'");
    if (lit == 0) {
      cnf.add_clause(current);
      current.clear();
    } else {
      current.push_back(static_cast<int>(lit));
    }
  }
  if (!current.empty()) throw std::invalid_argument("dimacs: last clause not 0-terminated");
  if (declared_vars < 0) throw std::invalid_argument("dimacs: missing problem line");
  cnf.num_vars = std::max(cnf.num_vars, declared_vars);
  return cnf;
}

}  // namespace logiparam
