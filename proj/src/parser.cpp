#include "logiparam/parser.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace logiparam {

const char* parse_error_category_name(ParseErrorCategory c) {
  switch (c) {
    case ParseErrorCategory::Lexical: return "lexical";
    case ParseErrorCategory::Grammar: return "grammar";
    case ParseErrorCategory::SignatureViolation: return "signature-violation";
    case ParseErrorCategory::Scope: return "scope";
  }
  return "?";
}

namespace {

enum class Tok {
  End, Ident,
  KwO, KwP, KwF, KwBox, KwDia, KwBoxA, KwBoxP, KwOa, KwOp, KwForall, KwExists, KwTrue, KwFalse,
  Not, And, Or, Impl, Iff, LParen, RParen, Dot, Comma,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  size_t begin = 0;
  size_t end = 0;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  std::optional<ParseError> error;

  explicit Lexer(const std::string& s) : src(s) {}

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  Token next() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    Token t;
    t.begin = pos;
    if (pos >= src.size()) {
      t.end = pos;
      return t;
    }
    const char c = src[pos];
    if (ident_start(c)) {
      size_t s = pos;
      while (pos < src.size() && ident_char(src[pos])) ++pos;
      t.text = src.substr(s, pos - s);
      t.end = pos;
      if (t.text == "O") t.kind = Tok::KwO;
      else if (t.text == "P") t.kind = Tok::KwP;
      else if (t.text == "F") t.kind = Tok::KwF;
      else if (t.text == "Box") t.kind = Tok::KwBox;
      else if (t.text == "Dia") t.kind = Tok::KwDia;
      else if (t.text == "BoxA") t.kind = Tok::KwBoxA;
      else if (t.text == "BoxP") t.kind = Tok::KwBoxP;
      else if (t.text == "Oa") t.kind = Tok::KwOa;
      else if (t.text == "Op") t.kind = Tok::KwOp;
      else if (t.text == "forall") t.kind = Tok::KwForall;
      else if (t.text == "exists") t.kind = Tok::KwExists;
      else if (t.text == "true") t.kind = Tok::KwTrue;
      else if (t.text == "false") t.kind = Tok::KwFalse;
      else t.kind = Tok::Ident;
      return t;
    }
    auto sym = [&](Tok k, size_t len) {
      t.kind = k;
      t.text = src.substr(pos, len);
      pos += len;
      t.end = pos;
      return t;
    };
    switch (c) {
      case '~': return sym(Tok::Not, 1);
      case '&': return sym(Tok::And, 1);
      case '|': return sym(Tok::Or, 1);
      case '(': return sym(Tok::LParen, 1);
      case ')': return sym(Tok::RParen, 1);
      case '.': return sym(Tok::Dot, 1);
      case ',': return sym(Tok::Comma, 1);
      case '-':
        if (pos + 1 < src.size() && src[pos + 1] == '>') return sym(Tok::Impl, 2);
        break;
      case '<':
        if (pos + 2 < src.size() && src[pos + 1] == '-' && src[pos + 2] == '>') return sym(Tok::Iff, 3);
        break;
      default:
        break;
    }
    error = ParseError{std::string("unexpected character '") + c + "'", pos, pos + 1,
                       ParseErrorCategory::Lexical};
    t.end = pos + 1;
    return t;
  }
};

struct Parser {
  LogicId logic;
  std::vector<Token> toks;
  size_t at = 0;
  std::optional<ParseError> error;
  std::vector<std::string> bound;

  const Token& peek() const { return toks[at]; }
  Token take() { return toks[std::min(at++, toks.size() - 1)]; }

  void fail(const Token& t, std::string msg, ParseErrorCategory cat = ParseErrorCategory::Grammar) {
    if (!error) error = ParseError{std::move(msg), t.begin, t.end, cat};
  }

  bool require_admitted(Conn op, const Token& t) {
    const LogicId l = logic;
    bool ok = true;
    switch (op) {
      case Conn::Ob: case Conn::Perm: case Conn::Forb: ok = l != LogicId::FOL; break;
      case Conn::Box: case Conn::Dia: case Conn::ObC: case Conn::PermC:
        ok = l == LogicId::DDLE || l == LogicId::DDL_CJ; break;
      case Conn::BoxA: case Conn::BoxP: case Conn::ObA: case Conn::ObP:
        ok = l == LogicId::DDL_CJ; break;
      case Conn::Forall: case Conn::Exists: case Conn::Pred: ok = l == LogicId::FOL; break;
      default: break;
    }
    if (!ok) {
      fail(t, std::string("operator '") + t.text + "' not admitted by logic " + logic_name(l),
           ParseErrorCategory::SignatureViolation);
    }
    return ok;
  }

  bool expect(Tok k, const char* what) {
    if (peek().kind == k) {
      take();
      return true;
    }
    fail(peek(), std::string("expected ") + what);
    return false;
  }

  FormulaPtr parse_iff() {
    FormulaPtr lhs = parse_impl();
    if (!lhs) return nullptr;
    if (peek().kind == Tok::Iff) {
      take();
      FormulaPtr rhs = parse_iff();
      if (!rhs) return nullptr;
      return Formula::iff(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_impl() {
    FormulaPtr lhs = parse_or();
    if (!lhs) return nullptr;
    if (peek().kind == Tok::Impl) {
      take();
      FormulaPtr rhs = parse_impl();
      if (!rhs) return nullptr;
      return Formula::impl(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    if (!lhs) return nullptr;
    while (peek().kind == Tok::Or) {
      take();
      FormulaPtr rhs = parse_and();
      if (!rhs) return nullptr;
      lhs = Formula::lor(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_unary();
    if (!lhs) return nullptr;
    while (peek().kind == Tok::And) {
      take();
      FormulaPtr rhs = parse_unary();
      if (!rhs) return nullptr;
      lhs = Formula::land(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_deontic_parens(const Token& op) {
    // O(...) and P(...) are monadic until a top-level '|' splits consequent from
    // antecedent; F(...) is always monadic. The body binds tighter than '|'.
    if (!expect(Tok::LParen, "'('")) return nullptr;
    FormulaPtr body = parse_and();
    if (!body) return nullptr;
    if (peek().kind == Tok::Or) {
      const Token bar = take();
      if (op.kind == Tok::KwF) {
        fail(bar, "prohibition has no dyadic form");
        return nullptr;
      }
      const Conn conn = op.kind == Tok::KwO ? Conn::ObC : Conn::PermC;
      if (!require_admitted(conn, op)) return nullptr;
      FormulaPtr ante = parse_iff();
      if (!ante) return nullptr;
      if (!expect(Tok::RParen, "')'")) return nullptr;
      return conn == Conn::ObC ? Formula::ob_c(std::move(body), std::move(ante))
                               : Formula::perm_c(std::move(body), std::move(ante));
    }
    if (!expect(Tok::RParen, "')' or '|'")) return nullptr;
    const Conn conn = op.kind == Tok::KwO ? Conn::Ob : (op.kind == Tok::KwP ? Conn::Perm : Conn::Forb);
    if (!require_admitted(conn, op)) return nullptr;
    switch (conn) {
      case Conn::Ob: return Formula::ob(std::move(body));
      case Conn::Perm: return Formula::perm(std::move(body));
      default: return Formula::forb(std::move(body));
    }
  }

  FormulaPtr parse_quantifier(const Token& op) {
    if (!require_admitted(op.kind == Tok::KwForall ? Conn::Forall : Conn::Exists, op)) return nullptr;
    const Token var = peek();
    if (var.kind != Tok::Ident) {
      fail(var, "expected a variable name");
      return nullptr;
    }
    take();
    if (std::find(bound.begin(), bound.end(), var.text) != bound.end()) {
      fail(var, "variable '" + var.text + "' shadows an enclosing binder", ParseErrorCategory::Scope);
      return nullptr;
    }
    if (!expect(Tok::Dot, "'.'")) return nullptr;
    bound.push_back(var.text);
    FormulaPtr body = parse_iff();
    bound.pop_back();
    if (!body) return nullptr;
    return op.kind == Tok::KwForall ? Formula::forall(var.text, std::move(body))
                                    : Formula::exists(var.text, std::move(body));
  }

  FormulaPtr parse_pred_or_atom(const Token& name) {
    if (peek().kind != Tok::LParen) return Formula::atom(name.text);
    if (!require_admitted(Conn::Pred, name)) return nullptr;
    take();
    std::vector<Term> terms;
    if (peek().kind != Tok::RParen) {
      for (;;) {
        const Token t = peek();
        if (t.kind != Tok::Ident) {
          fail(t, "expected a term");
          return nullptr;
        }
        take();
        const bool is_var = std::find(bound.begin(), bound.end(), t.text) != bound.end();
        terms.push_back(is_var ? Term::var(t.text) : Term::cons(t.text));
        if (peek().kind == Tok::Comma) {
          take();
          continue;
        }
        break;
      }
    }
    if (!expect(Tok::RParen, "')'")) return nullptr;
    return Formula::pred(name.text, std::move(terms));
  }

  FormulaPtr parse_unary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Not: {
        take();
        FormulaPtr k = parse_unary();
        return k ? Formula::lnot(std::move(k)) : nullptr;
      }
      case Tok::KwBox:
      case Tok::KwDia:
      case Tok::KwBoxA:
      case Tok::KwBoxP:
      case Tok::KwOa:
      case Tok::KwOp: {
        take();
        Conn conn = Conn::Box;
        if (t.kind == Tok::KwDia) conn = Conn::Dia;
        else if (t.kind == Tok::KwBoxA) conn = Conn::BoxA;
        else if (t.kind == Tok::KwBoxP) conn = Conn::BoxP;
        else if (t.kind == Tok::KwOa) conn = Conn::ObA;
        else if (t.kind == Tok::KwOp) conn = Conn::ObP;
        if (!require_admitted(conn, t)) return nullptr;
        FormulaPtr k = parse_unary();
        if (!k) return nullptr;
        switch (conn) {
          case Conn::Box: return Formula::box(std::move(k));
          case Conn::Dia: return Formula::dia(std::move(k));
          case Conn::BoxA: return Formula::box_a(std::move(k));
          case Conn::BoxP: return Formula::box_p(std::move(k));
          case Conn::ObA: return Formula::ob_a(std::move(k));
          default: return Formula::ob_p(std::move(k));
        }
      }
      case Tok::KwO:
      case Tok::KwP:
      case Tok::KwF:
        take();
        return parse_deontic_parens(t);
      case Tok::KwForall:
      case Tok::KwExists:
        take();
        return parse_quantifier(t);
      case Tok::KwTrue:
        take();
        return Formula::top();
      case Tok::KwFalse:
        take();
        return Formula::bot();
      case Tok::Ident:
        take();
        return parse_pred_or_atom(t);
      case Tok::LParen: {
        take();
        FormulaPtr inner = parse_iff();
        if (!inner) return nullptr;
        if (!expect(Tok::RParen, "')'")) return nullptr;
        return inner;
      }
      case Tok::End:
        fail(t, "unexpected end of input");
        return nullptr;
      default:
        fail(t, "unexpected token '" + t.text + "'");
        return nullptr;
    }
  }
};

}  // namespace

ParseResult parse_formula(const std::string& src, LogicId logic) {
  Lexer lex(src);
  std::vector<Token> toks;
  for (;;) {
    Token t = lex.next();
    if (lex.error) return *lex.error;
    toks.push_back(t);
    if (t.kind == Tok::End) break;
  }
  Parser p{logic, std::move(toks), {}, {}, {}};
  FormulaPtr f = p.parse_iff();
  if (p.error) return *p.error;
  if (!f) return ParseError{"empty input", 0, 0, ParseErrorCategory::Grammar};
  if (p.peek().kind != Tok::End) {
    return ParseError{"unexpected trailing input", p.peek().begin, p.peek().end,
                      ParseErrorCategory::Grammar};
  }
  return f;
}

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::Classical: return "classical";
    case Domain::Commonsense: return "commonsense";
    case Domain::Default: return "default";
    case Domain::Modalities: return "modalities";
    case Domain::Bioethics: return "bioethics";
  }
  return "?";
}

bool domain_from_name(const std::string& name, Domain& out) {
  if (name == "classical") { out = Domain::Classical; return true; }
  if (name == "commonsense") { out = Domain::Commonsense; return true; }
  if (name == "default") { out = Domain::Default; return true; }
  if (name == "modalities") { out = Domain::Modalities; return true; }
  if (name == "bioethics") { out = Domain::Bioethics; return true; }
  return false;
}

namespace {

using nlohmann::json;

ParseError doc_error(std::string msg) {
  return ParseError{std::move(msg), 0, 0, ParseErrorCategory::Grammar};
}

std::optional<ParseError> check_formula_field(const std::string& src, LogicId logic,
                                              const std::string& where) {
  ParseResult r = parse_formula(src, logic);
  if (auto* err = std::get_if<ParseError>(&r)) {
    ParseError out = *err;
    out.message = where + ": " + out.message;
    return out;
  }
  return std::nullopt;
}

std::variant<ProblemDoc, ParseError> problem_from_json(const json& j) {
  if (!j.is_object()) return doc_error("problem document must be a JSON object");
  ProblemDoc doc;
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
    return doc_error("problem field 'id' must be a non-empty string");
  doc.id = j["id"].get<std::string>();
  if (!j.contains("domain") || !j["domain"].is_string() ||
      !domain_from_name(j["domain"].get<std::string>(), doc.domain))
    return doc_error("problem '" + doc.id +
                     "': field 'domain' must be one of classical, commonsense, default, "
                     "modalities, bioethics");
  if (!j.contains("premise") || !j["premise"].is_string())
    return doc_error("problem '" + doc.id + "': field 'premise' must be a string");
  doc.premise = j["premise"].get<std::string>();
  if (!j.contains("hypothesis") || !j["hypothesis"].is_string())
    return doc_error("problem '" + doc.id + "': field 'hypothesis' must be a string");
  doc.hypothesis = j["hypothesis"].get<std::string>();
  if (!j.contains("explanation") || !j["explanation"].is_array() || j["explanation"].empty())
    return doc_error("problem '" + doc.id + "': field 'explanation' must be a non-empty array");
  for (const auto& e : j["explanation"]) {
    if (!e.is_string())
      return doc_error("problem '" + doc.id + "': 'explanation' entries must be strings");
    doc.explanation.push_back(e.get<std::string>());
  }
  if (j.contains("gold")) {
    if (!j["gold"].is_object())
      return doc_error("problem '" + doc.id + "': field 'gold' must be an object keyed by logic");
    for (auto it = j["gold"].begin(); it != j["gold"].end(); ++it) {
      LogicId logic;
      if (!logic_from_name(it.key(), logic))
        return doc_error("problem '" + doc.id + "': unknown logic '" + it.key() + "' in gold");
      const json& g = it.value();
      GoldFormalization gold;
      if (!g.is_object() || !g.contains("theory") || !g["theory"].is_array() ||
          !g.contains("steps") || !g["steps"].is_array() || !g.contains("goal") ||
          !g["goal"].is_string())
        return doc_error("problem '" + doc.id + "': gold." + it.key() +
                         " must have arrays 'theory' and 'steps' and string 'goal'");
      const std::string base = "problem '" + doc.id + "' gold." + it.key();
      size_t i = 0;
      for (const auto& s : g["theory"]) {
        if (!s.is_string()) return doc_error(base + ".theory entries must be strings");
        if (auto err = check_formula_field(s.get<std::string>(), logic,
                                           base + ".theory[" + std::to_string(i) + "]"))
          return *err;
        gold.theory.push_back(s.get<std::string>());
        ++i;
      }
      i = 0;
      for (const auto& s : g["steps"]) {
        if (!s.is_string()) return doc_error(base + ".steps entries must be strings");
        if (auto err = check_formula_field(s.get<std::string>(), logic,
                                           base + ".steps[" + std::to_string(i) + "]"))
          return *err;
        gold.steps.push_back(s.get<std::string>());
        ++i;
      }
      if (auto err = check_formula_field(g["goal"].get<std::string>(), logic, base + ".goal"))
        return *err;
      gold.goal = g["goal"].get<std::string>();
      doc.gold[logic] = std::move(gold);
    }
  }
  return doc;
}

}  // namespace

ProblemResult parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    return ParseError{std::string("invalid JSON: ") + e.what(), e.byte, e.byte,
                      ParseErrorCategory::Lexical};
  }
  if (j.is_array()) {
    if (j.size() != 1)
      return doc_error("expected a single problem document (file holds " +
                       std::to_string(j.size()) + " cases; use the dataset loader)");
    j = j[0];
  }
  return problem_from_json(j);
}

ProblemsResult parse_problems(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    return ParseError{std::string("invalid JSON: ") + e.what(), e.byte, e.byte,
                      ParseErrorCategory::Lexical};
  }
  std::vector<ProblemDoc> docs;
  if (j.is_object()) {
    auto r = problem_from_json(j);
    if (auto* err = std::get_if<ParseError>(&r)) return *err;
    docs.push_back(std::get<ProblemDoc>(std::move(r)));
    return docs;
  }
  if (!j.is_array()) return doc_error("problem file must be a JSON array of case objects");
  for (const auto& item : j) {
    auto r = problem_from_json(item);
    if (auto* err = std::get_if<ParseError>(&r)) return *err;
    docs.push_back(std::get<ProblemDoc>(std::move(r)));
  }
  return docs;
}

}  // namespace logiparam
