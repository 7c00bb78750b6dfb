#include "logiparam/encode.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace logiparam {

namespace {

WorldSet full_mask(int num_worlds) { return (WorldSet{1} << num_worlds) - 1; }

bool bit(WorldSet s, int w) { return (s >> w) & 1; }

// Builds the CNF for one bounded query. Every subformula gets a truth variable per world
// (world-independent operators share one across the row); frame structure gets its own
// variables; the clauses tie the two together so a satisfying assignment decodes straight
// into a model.
class Encoder {
 public:
  Encoder(LogicId logic, int num_worlds, bool serial)
      : logic_(logic), k_(num_worlds), serial_(serial) {
    if (num_worlds < 1) throw std::invalid_argument("bounded search needs at least one world");
    if (num_worlds > 8) throw std::invalid_argument("bounded search is capped at 8 worlds");
    if (logic == LogicId::FOL)
      throw std::invalid_argument("first-order queries go through grounding, not world bounds");
    out_.logic = logic;
    out_.num_worlds = num_worlds;
    build_frame();
  }

  EncodeResult run(const std::vector<FormulaPtr>& theory, const FormulaPtr& goal) {
    for (const FormulaPtr& f : theory) {
      FormulaPtr n = normalize(f);
      out_.theory.push_back(n);
      out_.cnf.add_clause({var_at(n, 0)});
    }
    if (goal) {
      out_.goal = normalize(goal);
      out_.cnf.add_clause({-var_at(out_.goal, 0)});
    }
    out_.atom_names.assign(atom_names_.begin(), atom_names_.end());
    return std::move(out_);
  }

 private:
  FormulaPtr normalize(const FormulaPtr& f) const {
    return simplify(expand_duals(desugar_monadic(f, logic_)));
  }

  int fresh() { return out_.cnf.fresh_var(); }

  void add(Clause c) { out_.cnf.add_clause(std::move(c)); }

  void build_frame() {
    const WorldSet full = full_mask(k_);
    if (logic_ == LogicId::KD) {
      alloc_square(out_.relation_var);
      if (serial_) {
        for (int w = 0; w < k_; ++w) add(Clause(out_.relation_var[w]));
      }
      return;
    }
    if (logic_ == LogicId::DDLE) {
      alloc_square(out_.relation_var);
      const auto& b = out_.relation_var;
      for (int w = 0; w < k_; ++w) add({b[w][w]});
      for (int w = 0; w < k_; ++w)
        for (int v = w + 1; v < k_; ++v) add({b[w][v], b[v][w]});
      for (int w = 0; w < k_; ++w)
        for (int v = 0; v < k_; ++v)
          for (int u = 0; u < k_; ++u) add({-b[w][v], -b[v][u], b[w][u]});
      return;
    }
    // Actual/potential frame: av/pv bits plus the full ob membership table.
    alloc_square(out_.av_var);
    alloc_square(out_.pv_var);
    for (int w = 0; w < k_; ++w) {
      add(Clause(out_.av_var[w]));
      add({out_.pv_var[w][w]});
      for (int v = 0; v < k_; ++v) add({-out_.av_var[w][v], out_.pv_var[w][v]});
    }
    out_.ob_var.assign(full + 1, std::vector<int>(full + 1, 0));
    for (WorldSet x = 0; x <= full; ++x)
      for (WorldSet y = 0; y <= full; ++y) out_.ob_var[x][y] = fresh();
    for (const ObRule& rule : ob_rules()) {
      const WorldSet y_top = rule.arity >= 2 ? full : 0;
      const WorldSet z_top = rule.arity >= 3 ? full : 0;
      for (WorldSet x = 0; x <= full; ++x) {
        for (WorldSet y = 0; y <= y_top; ++y) {
          for (WorldSet z = 0; z <= z_top; ++z) {
            if (!rule.guard(x, y, z, full)) continue;
            Clause c;
            for (int i = 0; i < rule.num_premises; ++i) {
              const ObMembership& p = rule.premises[i];
              c.push_back(-out_.ob_var[p.context(x, y, z, full)][p.member(x, y, z, full)]);
            }
            const int cv =
                out_.ob_var[rule.conclusion.context(x, y, z, full)]
                           [rule.conclusion.member(x, y, z, full)];
            c.push_back(rule.conclusion_in_ob ? cv : -cv);
            add(std::move(c));
          }
        }
      }
    }
  }

  void alloc_square(std::vector<std::vector<int>>& table) {
    table.assign(k_, std::vector<int>(k_, 0));
    for (int w = 0; w < k_; ++w)
      for (int v = 0; v < k_; ++v) table[w][v] = fresh();
  }

  int var_at(const FormulaPtr& f, int world) {
    encode_node(f);
    return out_.truth_var.find(f)->second[world];
  }

  std::vector<int>& row_of(const FormulaPtr& f) { return out_.truth_var.find(f)->second; }

  std::vector<int> alloc_row(const FormulaPtr& f, bool world_independent) {
    std::vector<int> row(k_, 0);
    if (world_independent) {
      row.assign(k_, fresh());
    } else {
      for (int w = 0; w < k_; ++w) row[w] = fresh();
    }
    out_.truth_var.emplace(f, row);
    return row;
  }

  // t[w] <-> g holds at every world the w-th row of bits points to. The reverse direction
  // needs one witness variable per candidate world (pointed-to and failing g).
  void encode_universal_over(const std::vector<int>& t,
                             const std::vector<std::vector<int>>& bits,
                             const std::vector<int>& g_row) {
    for (int w = 0; w < k_; ++w) {
      Clause witness_or{t[w]};
      for (int v = 0; v < k_; ++v) {
        add({-t[w], -bits[w][v], g_row[v]});
        const int u = fresh();
        add({-u, bits[w][v]});
        add({-u, -g_row[v]});
        witness_or.push_back(u);
      }
      add(std::move(witness_or));
    }
  }

  // Selector variables: sel[X] true exactly when the truth set of g equals X.
  const std::vector<int>& truth_set_selectors(const FormulaPtr& g) {
    auto it = selectors_.find(g);
    if (it != selectors_.end()) return it->second;
    const std::vector<int> g_row = row_of(g);
    std::vector<int> sels = make_selectors(g_row);
    return selectors_.emplace(g, std::move(sels)).first->second;
  }

  std::vector<int> make_selectors(const std::vector<int>& bits) {
    const WorldSet full = full_mask(k_);
    std::vector<int> sels(full + 1, 0);
    for (WorldSet x = 0; x <= full; ++x) {
      const int s = fresh();
      sels[x] = s;
      Clause back{s};
      for (int v = 0; v < k_; ++v) {
        const int lit = bit(x, v) ? bits[v] : -bits[v];
        add({-s, lit});
        back.push_back(-lit);
      }
      add(std::move(back));
    }
    return sels;
  }

  const std::vector<int>& version_selectors(std::vector<std::vector<int>>& cache,
                                            const std::vector<std::vector<int>>& bits, int w) {
    if (cache.empty()) cache.assign(k_, {});
    if (cache[w].empty()) cache[w] = make_selectors(bits[w]);
    return cache[w];
  }

  // Best-set membership: best[v] true iff v satisfies a and is at least as good as every
  // world satisfying a.
  const std::vector<int>& best_set(const FormulaPtr& antecedent) {
    auto it = best_.find(antecedent);
    if (it != best_.end()) return it->second;
    const std::vector<int> a_row = row_of(antecedent);
    const auto& b = out_.relation_var;
    std::vector<int> best(k_, 0);
    for (int v = 0; v < k_; ++v) best[v] = fresh();
    for (int v = 0; v < k_; ++v) {
      add({-best[v], a_row[v]});
      Clause beaten{best[v], -a_row[v]};
      for (int u = 0; u < k_; ++u) {
        add({-best[v], -a_row[u], b[v][u]});
        const int m = fresh();
        add({-m, a_row[u]});
        add({-m, -b[v][u]});
        beaten.push_back(m);
      }
      add(std::move(beaten));
    }
    return best_.emplace(antecedent, std::move(best)).first->second;
  }

  void encode_node(const FormulaPtr& f) {
    if (out_.truth_var.count(f)) return;
    for (const FormulaPtr& kid : f->kids()) encode_node(kid);
    switch (f->kind()) {
      case Conn::Atom: {
        alloc_row(f, false);
        atom_names_.insert(f->name());
        return;
      }
      case Conn::Top:
      case Conn::Bot: {
        const auto row = alloc_row(f, true);
        add({f->kind() == Conn::Top ? row[0] : -row[0]});
        return;
      }
      case Conn::Not: {
        const auto a = row_of(f->kid(0));
        const auto row = alloc_row(f, false);
        for (int w = 0; w < k_; ++w) {
          add({row[w], a[w]});
          add({-row[w], -a[w]});
        }
        return;
      }
      case Conn::And:
      case Conn::Or:
      case Conn::Impl:
      case Conn::Iff: {
        const auto a = row_of(f->kid(0));
        const auto b = row_of(f->kid(1));
        const auto row = alloc_row(f, false);
        for (int w = 0; w < k_; ++w) {
          const int t = row[w];
          switch (f->kind()) {
            case Conn::And:
              add({-t, a[w]});
              add({-t, b[w]});
              add({t, -a[w], -b[w]});
              break;
            case Conn::Or:
              add({t, -a[w]});
              add({t, -b[w]});
              add({-t, a[w], b[w]});
              break;
            case Conn::Impl:
              add({t, a[w]});
              add({t, -b[w]});
              add({-t, -a[w], b[w]});
              break;
            default:  // Iff
              add({-t, -a[w], b[w]});
              add({-t, a[w], -b[w]});
              add({t, -a[w], -b[w]});
              add({t, a[w], b[w]});
              break;
          }
        }
        return;
      }
      case Conn::Ob: {
        if (logic_ != LogicId::KD) break;  // desugared away elsewhere
        const auto g = row_of(f->kid(0));
        const auto row = alloc_row(f, false);
        encode_universal_over(row, out_.relation_var, g);
        return;
      }
      case Conn::Box: {
        if (logic_ == LogicId::KD) break;
        const auto g = row_of(f->kid(0));
        const auto row = alloc_row(f, true);
        Clause fail{row[0]};
        for (int v = 0; v < k_; ++v) {
          add({-row[0], g[v]});
          fail.push_back(-g[v]);
        }
        add(std::move(fail));
        return;
      }
      case Conn::BoxA:
      case Conn::BoxP: {
        if (logic_ != LogicId::DDL_CJ) break;
        const auto g = row_of(f->kid(0));
        const auto row = alloc_row(f, false);
        encode_universal_over(row, f->kind() == Conn::BoxA ? out_.av_var : out_.pv_var, g);
        return;
      }
      case Conn::ObC: {
        if (logic_ == LogicId::DDLE) {
          const auto& best = best_set(f->kid(1));
          const auto c = row_of(f->kid(0));
          const auto row = alloc_row(f, true);
          Clause fail{row[0]};
          for (int v = 0; v < k_; ++v) {
            add({-row[0], -best[v], c[v]});
            const int x = fresh();
            add({-x, best[v]});
            add({-x, -c[v]});
            fail.push_back(x);
          }
          add(std::move(fail));
          return;
        }
        if (logic_ == LogicId::DDL_CJ) {
          const auto& sel_a = truth_set_selectors(f->kid(1));
          const auto& sel_c = truth_set_selectors(f->kid(0));
          const auto row = alloc_row(f, true);
          const WorldSet full = full_mask(k_);
          for (WorldSet x = 0; x <= full; ++x) {
            for (WorldSet y = 0; y <= full; ++y) {
              add({-sel_a[x], -sel_c[y], -row[0], out_.ob_var[x][y]});
              add({-sel_a[x], -sel_c[y], row[0], -out_.ob_var[x][y]});
            }
          }
          return;
        }
        break;
      }
      case Conn::ObA:
      case Conn::ObP: {
        if (logic_ != LogicId::DDL_CJ) break;
        const bool actual = f->kind() == Conn::ObA;
        const auto& sel_g = truth_set_selectors(f->kid(0));
        const auto row = alloc_row(f, false);
        const WorldSet full = full_mask(k_);
        for (int w = 0; w < k_; ++w) {
          const auto& sel_v = version_selectors(actual ? av_sel_ : pv_sel_,
                                                actual ? out_.av_var : out_.pv_var, w);
          for (WorldSet x = 0; x <= full; ++x) {
            for (WorldSet y = 0; y <= full; ++y) {
              if ((x & ~y) == 0) {
                // every version already satisfies the body, no live obligation
                add({-sel_v[x], -sel_g[y], -row[w]});
              } else {
                add({-sel_v[x], -sel_g[y], -row[w], out_.ob_var[x][y]});
                add({-sel_v[x], -sel_g[y], row[w], -out_.ob_var[x][y]});
              }
            }
          }
        }
        return;
      }
      default:
        break;
    }
    throw std::invalid_argument(std::string("operator '") + conn_name(f->kind()) +
                                "' has no bounded encoding in " + logic_name(logic_));
  }

  LogicId logic_;
  int k_;
  bool serial_;
  EncodeResult out_;
  std::set<std::string> atom_names_;
  std::unordered_map<FormulaPtr, std::vector<int>, FormulaHash, FormulaEq> selectors_;
  std::unordered_map<FormulaPtr, std::vector<int>, FormulaHash, FormulaEq> best_;
  std::vector<std::vector<int>> av_sel_, pv_sel_;
};

}  // namespace

EncodeResult encode_bounded(LogicId logic, const std::vector<FormulaPtr>& theory,
                            const FormulaPtr& goal, int num_worlds, bool serial) {
  Encoder enc(logic, num_worlds, serial);
  return enc.run(theory, goal);
}

namespace {

std::vector<std::map<std::string, bool>> decode_valuation(const EncodeResult& enc,
                                                          const std::vector<bool>& assignment) {
  std::vector<std::map<std::string, bool>> val(enc.num_worlds);
  for (const std::string& name : enc.atom_names) {
    const auto it = enc.truth_var.find(Formula::atom(name));
    assert(it != enc.truth_var.end());
    for (int w = 0; w < enc.num_worlds; ++w) val[w][name] = assignment[it->second[w]];
  }
  return val;
}

WorldSet decode_row(const std::vector<int>& vars, const std::vector<bool>& assignment) {
  WorldSet out = 0;
  for (size_t v = 0; v < vars.size(); ++v)
    if (assignment[vars[v]]) out |= WorldSet{1} << v;
  return out;
}

}  // namespace

Model decode_model(const EncodeResult& enc, const std::vector<bool>& assignment) {
  const int k = enc.num_worlds;
  if (enc.logic == LogicId::KD) {
    KripkeModel m;
    m.num_worlds = k;
    m.val = decode_valuation(enc, assignment);
    for (int w = 0; w < k; ++w) m.access.push_back(decode_row(enc.relation_var[w], assignment));
    return m;
  }
  if (enc.logic == LogicId::DDLE) {
    PreferenceModel m;
    m.num_worlds = k;
    m.val = decode_valuation(enc, assignment);
    for (int w = 0; w < k; ++w) m.better.push_back(decode_row(enc.relation_var[w], assignment));
    return m;
  }
  CJModel m;
  m.num_worlds = k;
  m.val = decode_valuation(enc, assignment);
  for (int w = 0; w < k; ++w) {
    m.av.push_back(decode_row(enc.av_var[w], assignment));
    m.pv.push_back(decode_row(enc.pv_var[w], assignment));
  }
  for (size_t x = 0; x < enc.ob_var.size(); ++x)
    for (size_t y = 0; y < enc.ob_var[x].size(); ++y)
      if (assignment[enc.ob_var[x][y]])
        m.ob.insert({static_cast<WorldSet>(x), static_cast<WorldSet>(y)});
  return m;
}

BoundedSearchResult find_model(LogicId logic, const std::vector<FormulaPtr>& theory,
                               const FormulaPtr& goal, int num_worlds, bool serial,
                               const Budget& budget) {
  EncodeResult enc = encode_bounded(logic, theory, goal, num_worlds, serial);
  BoundedSearchResult out;
  SolveResult solved = solve(enc.cnf, budget);
  out.status = solved.status;
  out.stats = solved.stats;
  if (solved.status != SatStatus::Sat) return out;
  out.model = decode_model(enc, solved.assignment);
  out.confirmed = true;
  for (const FormulaPtr& f : enc.theory) {
    if (!eval(out.model, 0, f)) out.confirmed = false;
  }
  if (enc.goal && eval(out.model, 0, enc.goal)) out.confirmed = false;
  assert(out.confirmed && "decoded model disagrees with the evaluator");
  return out;
}

}  // namespace logiparam
