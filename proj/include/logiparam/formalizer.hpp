#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "logiparam/parser.hpp"

namespace logiparam {

// What the previous iteration learned, handed back to the formalizer so it can repair the
// formalization. The guidance string is the full logic-aware message, countermodel
// included; the structured fields exist so mocks and tests do not have to scrape it.
enum class FeedbackKind { MissingBridge, Inconsistency, Syntax };

const char* feedback_kind_name(FeedbackKind k);

struct Feedback {
  FeedbackKind kind = FeedbackKind::MissingBridge;
  // Index of the unprovable chain entry; the hypothesis sits at index == number of steps.
  int failed_index = -1;
  std::string failed_formula;  // surface syntax, empty unless kind == MissingBridge
  std::string countermodel;    // model dump, empty when the failure produced none
  std::string guidance;
};

// One case rendered into a logic: premises become the theory, the explanation becomes the
// ordered proof steps, the hypothesis becomes the goal. raw keeps the textual payload the
// formulas were read from, one 'theory:' / 'step:' / 'goal:' line each.
struct Formalization {
  LogicId logic = LogicId::KD;
  std::vector<FormulaPtr> theory;
  std::vector<FormulaPtr> steps;
  FormulaPtr goal;
  std::string raw;
};

// The formalizer produced text that does not parse (or lacks required parts).
struct FormalizeSyntaxError {
  std::string field;   // which part failed: "theory[2]", "goal", "reply", ...
  std::string source;  // the offending text
  ParseError error;
};

// The remote endpoint stayed unreachable through every retry. Cases that end here are
// reported as timeouts, never as syntactic errors, so the syntax metric stays about
// formalization quality.
struct FormalizeTransportError {
  std::string detail;
  int attempts = 0;
};

using FormalizeResult =
    std::variant<Formalization, FormalizeSyntaxError, FormalizeTransportError>;

enum class FormalizerKind { GoldMock, GapInjectingMock, RemoteLlm };

const char* formalizer_kind_name(FormalizerKind k);
bool formalizer_kind_from_name(const std::string& name, FormalizerKind& out);

struct FormalizerSpec {
  FormalizerKind kind = FormalizerKind::GoldMock;

  // gap-injecting-mock: which theory formula to withhold on the first attempt. Negative
  // values count from the back, so the default drops the last (usually the bridge rule).
  int gap_index = -1;

  // remote-llm. Empty url/key fall back to LOGIPARAM_LLM_URL / LOGIPARAM_LLM_KEY.
  std::string base_url;
  std::string api_key;
  std::string model = "general-chat";
  std::string prompt_dir = "prompts";
  int max_in_flight = 2;  // requests allowed through the gateway at once
  int retries = 2;        // transport retries after the first attempt
  int backoff_ms = 250;   // delay before the first retry, doubled each further retry
};

// Transport seam for the remote formalizer: one HTTP POST of a JSON body to the
// chat-completion endpoint. Returns nothing when the connection itself failed.
// Implementations must tolerate concurrent calls.
struct HttpReply {
  int status = 0;
  std::string body;
};

class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual std::optional<HttpReply> post(const std::string& base_url,
                                        const std::string& api_key,
                                        const std::string& body) = 0;
};

std::shared_ptr<LlmTransport> make_http_transport();

class Formalizer {
 public:
  virtual ~Formalizer() = default;

  // feedback is null on the first attempt of a case. Safe to call from many threads.
  virtual FormalizeResult run(const ProblemDoc& problem, LogicId logic,
                              const Feedback* feedback) = 0;
  virtual FormalizerKind kind() const = 0;
};

// Builds the formalizer described by spec; the two-argument form injects the transport
// (tests use a scripted one). Throws std::invalid_argument on an unusable spec, e.g. a
// missing prompt template directory for remote-llm.
std::unique_ptr<Formalizer> make_formalizer(const FormalizerSpec& spec);
std::unique_ptr<Formalizer> make_formalizer(const FormalizerSpec& spec,
                                            std::shared_ptr<LlmTransport> transport);

// Renders the prompt the remote formalizer would send: the per-logic keyword, formalize
// and sketch stage templates from spec.prompt_dir, plus the refine stage when feedback is
// present. {{premise}}, {{hypothesis}}, {{explanation}} and {{feedback}} are substituted.
// Exposed so tests and the CLI can inspect prompts without a network.
std::string render_prompt(const FormalizerSpec& spec, const ProblemDoc& problem,
                          LogicId logic, const Feedback* feedback);

// The stage template file for (logic, stage), stage one of "keywords", "formalize",
// "sketch", "refine". Throws std::invalid_argument when the file is missing.
std::string prompt_template_path(const std::string& prompt_dir, LogicId logic,
                                 const std::string& stage);

}  // namespace logiparam
