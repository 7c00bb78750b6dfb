#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "logiparam/formula.hpp"

namespace logiparam {

enum class ParseErrorCategory { Lexical, Grammar, SignatureViolation, Scope };

const char* parse_error_category_name(ParseErrorCategory c);

struct ParseError {
  std::string message;
  // Byte offsets into the source text, [begin, end).
  size_t begin = 0;
  size_t end = 0;
  ParseErrorCategory category = ParseErrorCategory::Grammar;
};

using ParseResult = std::variant<FormulaPtr, ParseError>;

// Parses one formula in the surface syntax against the signature of `logic`.
//   connectives:  ~  &  |  ->  <->          constants: true, false
//   monadic deontic:  O(f)  P(f)  F(f)      dyadic:    O(g|f)  P(g|f)
//   alethic:  Box f   Dia f                 DDL_CJ:    BoxA f  BoxP f  Oa f  Op f
//   quantifiers:  forall x. f    exists x. f
//   predicates:   Name(t1, ..., tn)   (an identifier bound by an enclosing quantifier is a
//                                      variable, anything else is a constant)
// Inside O(...) / P(...) / F(...) the argument binds tighter than '|'; parenthesize the
// argument to embed disjunctions or arrows, e.g. O((a | b)).
ParseResult parse_formula(const std::string& src, LogicId logic);

// Problem documents: one natural-language case plus optional gold formalizations.
enum class Domain { Classical, Commonsense, Default, Modalities, Bioethics };

const char* domain_name(Domain d);
bool domain_from_name(const std::string& name, Domain& out);

struct GoldFormalization {
  std::vector<std::string> theory;
  std::vector<std::string> steps;
  std::string goal;
};

struct ProblemDoc {
  std::string id;
  Domain domain = Domain::Classical;
  std::string premise;
  std::string hypothesis;
  std::vector<std::string> explanation;  // non-empty
  std::map<LogicId, GoldFormalization> gold;

  bool has_gold(LogicId logic) const { return gold.count(logic) != 0; }
};

using ProblemResult = std::variant<ProblemDoc, ParseError>;
using ProblemsResult = std::variant<std::vector<ProblemDoc>, ParseError>;

// Parses a problem document: a JSON object, or a one-element JSON array holding it.
// Gold formalizations are syntax-checked against their logic here; failures carry the
// offending field in the message.
ProblemResult parse_problem(const std::string& text);

// Parses a problem file: a JSON array of case objects (a bare object is accepted too).
ProblemsResult parse_problems(const std::string& text);

}  // namespace logiparam
