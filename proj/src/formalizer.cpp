#include "logiparam/formalizer.hpp"

#include <httplib.h>
#include <json.hpp>

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace logiparam {

const char* feedback_kind_name(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::MissingBridge: return "missing-bridge";
    case FeedbackKind::Inconsistency: return "inconsistency";
    case FeedbackKind::Syntax: return "syntax";
  }
  return "?";
}

const char* formalizer_kind_name(FormalizerKind k) {
  switch (k) {
    case FormalizerKind::GoldMock: return "gold-mock";
    case FormalizerKind::GapInjectingMock: return "gap-injecting-mock";
    case FormalizerKind::RemoteLlm: return "remote-llm";
  }
  return "?";
}

bool formalizer_kind_from_name(const std::string& name, FormalizerKind& out) {
  if (name == "gold-mock") { out = FormalizerKind::GoldMock; return true; }
  if (name == "gap-injecting-mock") { out = FormalizerKind::GapInjectingMock; return true; }
  if (name == "remote-llm") { out = FormalizerKind::RemoteLlm; return true; }
  return false;
}

namespace {

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// The payload contract shared by every formalizer: one formula per line, each line
// prefixed with its slot. Mocks synthesize it, the remote path reads it out of the
// reply's fenced block, and both keep it in Formalization::raw for the trace.
struct Payload {
  std::vector<std::string> theory;
  std::vector<std::string> steps;
  std::string goal;

  std::string text() const {
    std::ostringstream out;
    for (const auto& t : theory) out << "theory: " << t << "\n";
    for (const auto& s : steps) out << "step: " << s << "\n";
    out << "goal: " << goal << "\n";
    return out.str();
  }
};

FormalizeResult parse_payload(const Payload& payload, LogicId logic) {
  Formalization f;
  f.logic = logic;
  f.raw = payload.text();
  auto parse_into = [&](const std::string& src, const std::string& field,
                        FormulaPtr& out) -> std::optional<FormalizeSyntaxError> {
    ParseResult r = parse_formula(src, logic);
    if (const ParseError* e = std::get_if<ParseError>(&r))
      return FormalizeSyntaxError{field, src, *e};
    out = std::get<FormulaPtr>(r);
    return std::nullopt;
  };
  for (size_t i = 0; i < payload.theory.size(); ++i) {
    FormulaPtr p;
    if (auto err = parse_into(payload.theory[i], "theory[" + std::to_string(i) + "]", p))
      return *err;
    f.theory.push_back(std::move(p));
  }
  for (size_t i = 0; i < payload.steps.size(); ++i) {
    FormulaPtr p;
    if (auto err = parse_into(payload.steps[i], "step[" + std::to_string(i) + "]", p))
      return *err;
    f.steps.push_back(std::move(p));
  }
  if (auto err = parse_into(payload.goal, "goal", f.goal)) return *err;
  return f;
}

Payload gold_payload(const ProblemDoc& problem, LogicId logic) {
  const GoldFormalization& gold = problem.gold.at(logic);
  return Payload{gold.theory, gold.steps, gold.goal};
}

void require_gold(const ProblemDoc& problem, LogicId logic, const char* who) {
  if (!problem.has_gold(logic))
    throw std::invalid_argument(std::string(who) + " needs a gold formalization for logic " +
                                logic_name(logic) + " on case '" + problem.id + "'");
}

class GoldMock : public Formalizer {
 public:
  FormalizeResult run(const ProblemDoc& problem, LogicId logic, const Feedback*) override {
    require_gold(problem, logic, "gold-mock");
    return parse_payload(gold_payload(problem, logic), logic);
  }
  FormalizerKind kind() const override { return FormalizerKind::GoldMock; }
};

// Returns the gold formalization with one theory formula withheld, and repairs it the
// moment feedback points at a missing bridge. This gives the pipeline a deterministic
// one-round refinement loop to measure against.
class GapInjectingMock : public Formalizer {
 public:
  explicit GapInjectingMock(int gap_index) : gap_index_(gap_index) {}

  FormalizeResult run(const ProblemDoc& problem, LogicId logic,
                      const Feedback* feedback) override {
    require_gold(problem, logic, "gap-injecting-mock");
    Payload payload = gold_payload(problem, logic);
    const bool repaired = feedback && feedback->kind == FeedbackKind::MissingBridge;
    if (!repaired && !payload.theory.empty()) {
      int idx = gap_index_;
      if (idx < 0) idx += static_cast<int>(payload.theory.size());
      if (idx < 0 || idx >= static_cast<int>(payload.theory.size()))
        idx = static_cast<int>(payload.theory.size()) - 1;
      payload.theory.erase(payload.theory.begin() + idx);
    }
    return parse_payload(payload, logic);
  }
  FormalizerKind kind() const override { return FormalizerKind::GapInjectingMock; }

 private:
  int gap_index_;
};

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("missing prompt template: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void substitute(std::string& text, const std::string& key, const std::string& value) {
  const std::string token = "{{" + key + "}}";
  size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
}

std::string render_template(std::string text, const ProblemDoc& problem,
                            const Feedback* feedback) {
  std::ostringstream explanation;
  for (size_t i = 0; i < problem.explanation.size(); ++i)
    explanation << (i + 1) << ". " << problem.explanation[i] << "\n";
  substitute(text, "premise", problem.premise);
  substitute(text, "hypothesis", problem.hypothesis);
  substitute(text, "explanation", explanation.str());
  substitute(text, "feedback", feedback ? feedback->guidance : "");
  return text;
}

// Caps how many requests are in flight at once; the remote gateway is the one shared
// resource the otherwise embarrassingly parallel harness has to queue on.
class Gate {
 public:
  explicit Gate(int slots) : slots_(slots < 1 ? 1 : slots) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < slots_; });
    ++in_flight_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
  int in_flight_ = 0;
};

struct GateGuard {
  explicit GateGuard(Gate& gate) : gate_(gate) { gate_.acquire(); }
  ~GateGuard() { gate_.release(); }
  Gate& gate_;
};

class HttpTransport : public LlmTransport {
 public:
  std::optional<HttpReply> post(const std::string& base_url, const std::string& api_key,
                                const std::string& body) override {
    httplib::Client client(base_url);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    httplib::Result res = client.Post("/v1/chat/completions", headers, body,
                                      "application/json");
    if (!res) return std::nullopt;
    return HttpReply{res->status, res->body};
  }
};

const std::array<const char*, 4> kPromptStages = {"keywords", "formalize", "sketch",
                                                  "refine"};

class RemoteLlm : public Formalizer {
 public:
  RemoteLlm(const FormalizerSpec& spec, std::shared_ptr<LlmTransport> transport)
      : spec_(spec), transport_(std::move(transport)), gate_(spec.max_in_flight) {
    if (spec_.base_url.empty()) spec_.base_url = env_or_empty("LOGIPARAM_LLM_URL");
    if (spec_.api_key.empty()) spec_.api_key = env_or_empty("LOGIPARAM_LLM_KEY");
    if (spec_.base_url.empty())
      throw std::invalid_argument(
          "remote-llm needs an endpoint: set spec.base_url or LOGIPARAM_LLM_URL");
    // Fail fast on a missing template set rather than midway through a run.
    for (LogicId logic : {LogicId::FOL, LogicId::KD, LogicId::DDLE, LogicId::DDL_CJ})
      for (const char* stage : kPromptStages)
        prompt_template_path(spec_.prompt_dir, logic, stage);
  }

  FormalizeResult run(const ProblemDoc& problem, LogicId logic,
                      const Feedback* feedback) override {
    const std::string prompt = render_prompt(spec_, problem, logic, feedback);
    nlohmann::json request = {
        {"model", spec_.model},
        {"temperature", 0},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    const std::string body = request.dump();

    std::optional<HttpReply> reply;
    int attempts = 0;
    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= spec_.retries; ++attempt) {
      if (attempt > 0) {
        const auto delay = std::chrono::milliseconds(
            static_cast<std::int64_t>(spec_.backoff_ms) << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      ++attempts;
      std::optional<HttpReply> r;
      {
        GateGuard guard(gate_);
        r = transport_->post(spec_.base_url, spec_.api_key, body);
      }
      if (r && r->status >= 200 && r->status < 300) {
        reply = std::move(r);
        break;
      }
      last_failure = r ? "endpoint answered status " + std::to_string(r->status)
                       : "connection failed";
    }
    if (!reply)
      return FormalizeTransportError{last_failure + " after " + std::to_string(attempts) +
                                         " attempts",
                                     attempts};
    return parse_reply(reply->body, logic);
  }

  FormalizerKind kind() const override { return FormalizerKind::RemoteLlm; }

 private:
  static FormalizeSyntaxError reply_error(const std::string& source, std::string message) {
    ParseError err;
    err.message = std::move(message);
    err.category = ParseErrorCategory::Grammar;
    err.begin = 0;
    err.end = source.size();
    return FormalizeSyntaxError{"reply", source, err};
  }

  static FormalizeResult parse_reply(const std::string& body, LogicId logic) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return reply_error(body, "reply is not valid JSON");
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
        !j["choices"][0].contains("message") ||
        !j["choices"][0]["message"].contains("content") ||
        !j["choices"][0]["message"]["content"].is_string())
      return reply_error(body, "reply is not chat-completion shaped");
    const std::string content = j["choices"][0]["message"]["content"].get<std::string>();

    const size_t open = content.find("```");
    if (open == std::string::npos)
      return reply_error(content, "reply contains no fenced formula block");
    size_t begin = content.find('\n', open);
    if (begin == std::string::npos)
      return reply_error(content, "unterminated fence in reply");
    ++begin;
    const size_t close = content.find("```", begin);
    if (close == std::string::npos)
      return reply_error(content, "unterminated fence in reply");
    const std::string block = content.substr(begin, close - begin);

    Payload payload;
    bool have_goal = false;
    std::istringstream lines(block);
    std::string line;
    while (std::getline(lines, line)) {
      const std::string t = trimmed(line);
      if (t.empty()) continue;
      if (t.rfind("theory:", 0) == 0) {
        payload.theory.push_back(trimmed(t.substr(7)));
      } else if (t.rfind("step:", 0) == 0) {
        payload.steps.push_back(trimmed(t.substr(5)));
      } else if (t.rfind("goal:", 0) == 0) {
        if (have_goal) return reply_error(t, "more than one goal line in formula block");
        payload.goal = trimmed(t.substr(5));
        have_goal = true;
      } else {
        return reply_error(t, "unrecognized formula block line (want theory:/step:/goal:)");
      }
    }
    if (!have_goal) return reply_error(block, "formula block has no goal line");
    return parse_payload(payload, logic);
  }

  FormalizerSpec spec_;
  std::shared_ptr<LlmTransport> transport_;
  Gate gate_;
};

}  // namespace

std::shared_ptr<LlmTransport> make_http_transport() {
  return std::make_shared<HttpTransport>();
}

std::unique_ptr<Formalizer> make_formalizer(const FormalizerSpec& spec) {
  return make_formalizer(spec, nullptr);
}

std::unique_ptr<Formalizer> make_formalizer(const FormalizerSpec& spec,
                                            std::shared_ptr<LlmTransport> transport) {
  switch (spec.kind) {
    case FormalizerKind::GoldMock:
      return std::make_unique<GoldMock>();
    case FormalizerKind::GapInjectingMock:
      return std::make_unique<GapInjectingMock>(spec.gap_index);
    case FormalizerKind::RemoteLlm:
      return std::make_unique<RemoteLlm>(spec,
                                         transport ? std::move(transport)
                                                   : make_http_transport());
  }
  throw std::invalid_argument("unknown formalizer kind");
}

std::string prompt_template_path(const std::string& prompt_dir, LogicId logic,
                                 const std::string& stage) {
  const std::string path =
      (std::filesystem::path(prompt_dir) / (std::string(logic_name(logic)) + "_" + stage +
                                            ".txt"))
          .string();
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("missing prompt template: " + path);
  return path;
}

std::string render_prompt(const FormalizerSpec& spec, const ProblemDoc& problem,
                          LogicId logic, const Feedback* feedback) {
  std::ostringstream out;
  for (const char* stage : kPromptStages) {
    if (std::string(stage) == "refine" && !feedback) continue;
    const std::string raw =
        read_file_or_throw(prompt_template_path(spec.prompt_dir, logic, stage));
    out << render_template(raw, problem, feedback) << "\n";
  }
  return out.str();
}

}  // namespace logiparam
