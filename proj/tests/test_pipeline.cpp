#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>
#include <variant>
#include <vector>

#include "logiparam/pipeline.hpp"

using namespace logiparam;

namespace {

ProblemDoc kd_problem() {
  ProblemDoc p;
  p.id = "borrowed-book";
  p.domain = Domain::Commonsense;
  p.premise = "Maya borrowed a novel and the loan ran out.";
  p.hypothesis = "Maya ought to return the novel.";
  p.explanation = {"The loan on the borrowed novel has run out.",
                   "Expired loans on borrowed items must be returned."};
  p.gold[LogicId::KD] = GoldFormalization{
      {"borrowed", "loan_expired", "borrowed & loan_expired -> O(return_item)"},
      {"borrowed & loan_expired"},
      "O(return_item)"};
  return p;
}

ProblemDoc fol_problem() {
  ProblemDoc p;
  p.id = "cataloguer";
  p.domain = Domain::Classical;
  p.premise = "Ines is on the cataloguing staff, and cataloguers shelve books.";
  p.hypothesis = "Ines shelves books.";
  p.explanation = {"Ines is a cataloguer, and every cataloguer shelves books."};
  p.gold[LogicId::FOL] = GoldFormalization{
      {"Cataloguer(ines)", "forall x. (Cataloguer(x) -> Shelves(x))"},
      {"Cataloguer(ines)"},
      "Shelves(ines)"};
  return p;
}

ProblemDoc ddle_problem() {
  ProblemDoc p;
  p.id = "dog-walk";
  p.domain = Domain::Modalities;
  p.premise = "The dog ought to be walked; after a walk the leash ought to be hung up.";
  p.hypothesis = "The leash ought to be hung up.";
  p.explanation = {"Walking is obligatory, so the conditional duty detaches."};
  p.gold[LogicId::DDLE] = GoldFormalization{
      {"O(walk_dog)", "O(hang_leash | walk_dog)"}, {"O(walk_dog)"}, "O(hang_leash)"};
  return p;
}

ProblemDoc contradictory_problem() {
  ProblemDoc p = kd_problem();
  p.id = "clashing-duties";
  p.gold[LogicId::KD] =
      GoldFormalization{{"O(return_item)", "O(~return_item)"}, {}, "O(return_item)"};
  return p;
}

// Records every request and replays a fixed script of replies; past the end the last
// entry repeats. Tracks the highest number of simultaneous calls it ever saw.
class ScriptedTransport : public LlmTransport {
 public:
  explicit ScriptedTransport(std::vector<std::optional<HttpReply>> script, int sleep_ms = 0)
      : script_(std::move(script)), sleep_ms_(sleep_ms) {}

  std::optional<HttpReply> post(const std::string&, const std::string& api_key,
                                const std::string& body) override {
    const int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    size_t index;
    {
      std::lock_guard<std::mutex> lock(mu_);
      index = bodies_.size();
      bodies_.push_back(body);
      keys_.push_back(api_key);
    }
    if (sleep_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms_));
    --in_flight_;
    if (script_.empty()) return std::nullopt;
    return script_[std::min(index, script_.size() - 1)];
  }

  std::vector<std::string> bodies() {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }
  std::vector<std::string> keys() {
    std::lock_guard<std::mutex> lock(mu_);
    return keys_;
  }
  int max_in_flight() const { return max_in_flight_.load(); }

 private:
  std::vector<std::optional<HttpReply>> script_;
  int sleep_ms_;
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::vector<std::string> keys_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

HttpReply chat_reply(const std::string& payload) {
  nlohmann::json message = {{"role", "assistant"},
                            {"content", "Formalization below.\n```\n" + payload + "```\n"}};
  nlohmann::json body = {{"choices", nlohmann::json::array({{{"message", message}}})}};
  return HttpReply{200, body.dump()};
}

const std::string kKdPayload =
    "theory: borrowed\n"
    "theory: loan_expired\n"
    "theory: borrowed & loan_expired -> O(return_item)\n"
    "step: borrowed & loan_expired\n"
    "goal: O(return_item)\n";

const std::string kKdGappedPayload =
    "theory: borrowed\n"
    "theory: loan_expired\n"
    "step: borrowed & loan_expired\n"
    "goal: O(return_item)\n";

// A complete throwaway template set with recognizable stage markers, removed on scope
// exit. Every logic gets the same four stages.
struct TempPromptDir {
  std::filesystem::path path;

  TempPromptDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("prompt-templates-" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()) +
            "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
    for (LogicId logic : {LogicId::FOL, LogicId::KD, LogicId::DDLE, LogicId::DDL_CJ}) {
      write(logic, "keywords", "KW {{premise}}\n");
      write(logic, "formalize", "FORM {{hypothesis}}\n{{explanation}}");
      write(logic, "sketch", "SK\n");
      write(logic, "refine", "FIX {{feedback}}\n");
    }
  }
  ~TempPromptDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  void write(LogicId logic, const std::string& stage, const std::string& content) {
    std::ofstream out(path / (std::string(logic_name(logic)) + "_" + stage + ".txt"),
                      std::ios::binary);
    out << content;
  }

  std::string str() const { return path.string(); }
};

FormalizerSpec remote_spec(const TempPromptDir& prompts,
                           std::string api_key = std::string()) {
  FormalizerSpec spec;
  spec.kind = FormalizerKind::RemoteLlm;
  spec.base_url = "http://gateway.invalid";
  spec.api_key = std::move(api_key);
  spec.prompt_dir = prompts.str();
  spec.backoff_ms = 0;
  return spec;
}

std::string request_prompt(const std::string& body) {
  const nlohmann::json j = nlohmann::json::parse(body);
  return j["messages"][0]["content"].get<std::string>();
}

PipelineOptions fixed_clock_options() {
  PipelineOptions opts;
  opts.deterministic_timing = true;
  return opts;
}

}  // namespace

TEST_CASE("the gold mock emits the payload contract verbatim") {
  const ProblemDoc p = kd_problem();
  auto mock = make_formalizer(FormalizerSpec{});
  CHECK(mock->kind() == FormalizerKind::GoldMock);

  const FormalizeResult r = mock->run(p, LogicId::KD, nullptr);
  REQUIRE(std::holds_alternative<Formalization>(r));
  const Formalization& f = std::get<Formalization>(r);
  CHECK(f.logic == LogicId::KD);
  CHECK(f.theory.size() == 3);
  CHECK(f.steps.size() == 1);
  CHECK(pretty(f.goal) == "O(return_item)");
  CHECK(f.raw == kKdPayload);
}

TEST_CASE("the gold mock refuses a case without gold for the requested logic") {
  const ProblemDoc p = kd_problem();
  auto mock = make_formalizer(FormalizerSpec{});
  CHECK_THROWS_WITH_AS(mock->run(p, LogicId::DDLE, nullptr),
                       doctest::Contains("needs a gold formalization for logic ddle"),
                       std::invalid_argument);
}

TEST_CASE("the gap mock withholds one theory formula until bridge feedback arrives") {
  const ProblemDoc p = kd_problem();
  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;

  auto raw_of = [&](Formalizer& mock, const Feedback* fb) {
    const FormalizeResult r = mock.run(p, LogicId::KD, fb);
    REQUIRE(std::holds_alternative<Formalization>(r));
    return std::get<Formalization>(r).raw;
  };

  SUBCASE("by default the last theory formula goes missing") {
    auto mock = make_formalizer(spec);
    const std::string raw = raw_of(*mock, nullptr);
    CHECK(raw == kKdGappedPayload);
  }
  SUBCASE("a bridge report restores the full theory") {
    auto mock = make_formalizer(spec);
    Feedback fb;
    fb.kind = FeedbackKind::MissingBridge;
    CHECK(raw_of(*mock, &fb) == kKdPayload);
  }
  SUBCASE("other feedback kinds do not repair the gap") {
    auto mock = make_formalizer(spec);
    Feedback fb;
    fb.kind = FeedbackKind::Syntax;
    CHECK(raw_of(*mock, &fb) == kKdGappedPayload);
  }
  SUBCASE("the index picks the withheld formula, counting from the back when negative") {
    spec.gap_index = 0;
    CHECK(raw_of(*make_formalizer(spec), nullptr) ==
          "theory: loan_expired\n"
          "theory: borrowed & loan_expired -> O(return_item)\n"
          "step: borrowed & loan_expired\n"
          "goal: O(return_item)\n");
    spec.gap_index = -2;
    CHECK(raw_of(*make_formalizer(spec), nullptr) ==
          "theory: borrowed\n"
          "theory: borrowed & loan_expired -> O(return_item)\n"
          "step: borrowed & loan_expired\n"
          "goal: O(return_item)\n");
  }
  SUBCASE("an index past either end clamps to the last formula") {
    spec.gap_index = 99;
    CHECK(raw_of(*make_formalizer(spec), nullptr) == kKdGappedPayload);
    spec.gap_index = -99;
    CHECK(raw_of(*make_formalizer(spec), nullptr) == kKdGappedPayload);
  }
}

TEST_CASE("a faithful formalization verifies without any refinement") {
  const ProblemDoc p = kd_problem();
  auto mock = make_formalizer(FormalizerSpec{});
  const CaseOutcome out = run_case(p, LogicId::KD, *mock, fixed_clock_options());

  CHECK(out.case_id == "borrowed-book");
  CHECK(out.domain == Domain::Commonsense);
  CHECK(out.logic == LogicId::KD);
  CHECK(out.formalizer == "gold-mock");
  CHECK(out.status == CaseStatus::Verified);
  CHECK(out.iterations_used == 0);
  CHECK(out.solving_ms > 0);
  CHECK(out.error_category.empty());
  REQUIRE(out.trace.size() == 1);
  const IterationTrace& it = out.trace[0];
  CHECK(it.formalized);
  CHECK(it.consistency == "Consistent");
  REQUIRE(it.step_verdicts.size() == 2);
  CHECK(it.step_verdicts[0] == "Entailed");
  CHECK(it.step_verdicts[1] == "Entailed");
  CHECK(it.failed_index == -1);
  CHECK_FALSE(it.gave_feedback);
}

TEST_CASE("a withheld bridge rule costs exactly one refinement round") {
  const ProblemDoc p = kd_problem();
  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;
  auto mock = make_formalizer(spec);
  const CaseOutcome out = run_case(p, LogicId::KD, *mock, fixed_clock_options());

  CHECK(out.status == CaseStatus::Verified);
  CHECK(out.iterations_used == 1);
  REQUIRE(out.trace.size() == 2);

  const IterationTrace& first = out.trace[0];
  CHECK(first.consistency == "Consistent");
  CHECK(first.failed_index == 1);
  REQUIRE(first.gave_feedback);
  CHECK(first.feedback.kind == FeedbackKind::MissingBridge);
  CHECK(first.feedback.failed_index == 1);
  CHECK(first.feedback.failed_formula == "O(return_item)");
  CHECK_FALSE(first.feedback.countermodel.empty());
  CHECK(first.feedback.guidance.find("Modal Axiom not satisfied") != std::string::npos);
  CHECK(first.feedback.guidance.find("the hypothesis itself") != std::string::npos);
  CHECK(first.feedback.guidance.find("Counterexample:") != std::string::npos);

  const IterationTrace& second = out.trace[1];
  CHECK(second.theory.size() == 3);
  CHECK_FALSE(second.gave_feedback);
  CHECK(second.step_verdicts == std::vector<std::string>{"Entailed", "Entailed"});
}

TEST_CASE("betterness-order failures speak of undetachable norms") {
  const ProblemDoc p = ddle_problem();

  auto gold = make_formalizer(FormalizerSpec{});
  const CaseOutcome direct = run_case(p, LogicId::DDLE, *gold, fixed_clock_options());
  CHECK(direct.status == CaseStatus::VerifiedUpToBound);
  CHECK(direct.iterations_used == 0);

  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;
  auto gap = make_formalizer(spec);
  const CaseOutcome repaired = run_case(p, LogicId::DDLE, *gap, fixed_clock_options());
  CHECK(repaired.status == CaseStatus::VerifiedUpToBound);
  CHECK(repaired.iterations_used == 1);
  REQUIRE(repaired.trace.size() == 2);
  CHECK(repaired.trace[0].feedback.guidance.find("Conditional norm not detachable") !=
        std::string::npos);
}

TEST_CASE("quantified-logic failures speak of missing premises") {
  const ProblemDoc p = fol_problem();
  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;
  auto gap = make_formalizer(spec);
  const CaseOutcome out = run_case(p, LogicId::FOL, *gap, fixed_clock_options());

  CHECK(out.status == CaseStatus::Verified);
  CHECK(out.iterations_used == 1);
  REQUIRE(out.trace.size() == 2);
  CHECK(out.trace[0].feedback.guidance.find("Missing premise") != std::string::npos);
  CHECK_FALSE(out.trace[0].feedback.countermodel.empty());
}

TEST_CASE("a contradictory theory is never verified, however many rounds run") {
  const ProblemDoc p = contradictory_problem();
  auto mock = make_formalizer(FormalizerSpec{});
  PipelineOptions opts = fixed_clock_options();
  const CaseOutcome out = run_case(p, LogicId::KD, *mock, opts);

  CHECK(out.status == CaseStatus::Inconsistent);
  CHECK(out.iterations_used == opts.max_refinements);
  REQUIRE(out.trace.size() == static_cast<size_t>(opts.max_refinements) + 1);
  for (const IterationTrace& it : out.trace) {
    CHECK(it.consistency == "Inconsistent");
    CHECK(it.step_verdicts.empty());
    REQUIRE(it.gave_feedback);
    CHECK(it.feedback.kind == FeedbackKind::Inconsistency);
    CHECK(it.feedback.guidance.find("contradictory under kd") != std::string::npos);
    CHECK(it.feedback.guidance.find("vacuous") != std::string::npos);
  }
}

TEST_CASE("unparseable formalizations surface as syntactic errors with their category") {
  ProblemDoc p = kd_problem();
  p.gold[LogicId::KD] = GoldFormalization{{"O(return_item)"}, {}, "Shelves(ines)"};
  auto mock = make_formalizer(FormalizerSpec{});

  const FormalizeResult r = mock->run(p, LogicId::KD, nullptr);
  REQUIRE(std::holds_alternative<FormalizeSyntaxError>(r));
  const FormalizeSyntaxError& err = std::get<FormalizeSyntaxError>(r);
  CHECK(err.field == "goal");
  CHECK(err.source == "Shelves(ines)");
  CHECK(err.error.category == ParseErrorCategory::SignatureViolation);

  const Feedback fb = feedback_for_syntax(err);
  CHECK(fb.kind == FeedbackKind::Syntax);
  CHECK(fb.guidance.find("did not parse") != std::string::npos);
  CHECK(fb.guidance.find("goal:") != std::string::npos);
  CHECK(fb.guidance.find("signature-violation, bytes") != std::string::npos);
  CHECK(fb.guidance.find("'Shelves(ines)'") != std::string::npos);

  PipelineOptions opts = fixed_clock_options();
  const CaseOutcome out = run_case(p, LogicId::KD, *mock, opts);
  CHECK(out.status == CaseStatus::SyntacticError);
  CHECK(out.error_category == "signature-violation");
  CHECK(out.iterations_used == opts.max_refinements);
  REQUIRE(out.trace.size() == static_cast<size_t>(opts.max_refinements) + 1);
  CHECK(out.trace[0].note.find("goal:") == 0);
  CHECK(out.trace[0].feedback.kind == FeedbackKind::Syntax);
  CHECK(out.solving_ms == 0);
}

TEST_CASE("solver-derived timing is identical across repeated runs") {
  const ProblemDoc p = kd_problem();
  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;

  auto first_mock = make_formalizer(spec);
  auto second_mock = make_formalizer(spec);
  const CaseOutcome a = run_case(p, LogicId::KD, *first_mock, fixed_clock_options());
  const CaseOutcome b = run_case(p, LogicId::KD, *second_mock, fixed_clock_options());
  CHECK(a.solving_ms == b.solving_ms);
  CHECK(a.solving_ms > 0);
}

TEST_CASE("the remote formalizer round-trips a fenced reply") {
  TempPromptDir prompts;
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<std::optional<HttpReply>>{chat_reply(kKdPayload)});
  auto remote = make_formalizer(remote_spec(prompts, "key-123"), transport);
  CHECK(remote->kind() == FormalizerKind::RemoteLlm);

  const ProblemDoc p = kd_problem();
  const CaseOutcome out = run_case(p, LogicId::KD, *remote, fixed_clock_options());
  CHECK(out.status == CaseStatus::Verified);
  CHECK(out.iterations_used == 0);
  CHECK(out.formalizer == "remote-llm");

  const auto bodies = transport->bodies();
  REQUIRE(bodies.size() == 1);
  const nlohmann::json request = nlohmann::json::parse(bodies[0]);
  CHECK(request["model"] == "general-chat");
  CHECK(request["temperature"] == 0);
  const std::string prompt = request_prompt(bodies[0]);
  CHECK(prompt.find("KW Maya borrowed a novel and the loan ran out.") != std::string::npos);
  CHECK(prompt.find("FORM Maya ought to return the novel.") != std::string::npos);
  CHECK(prompt.find("1. The loan on the borrowed novel has run out.") != std::string::npos);
  CHECK(prompt.find("FIX") == std::string::npos);
  CHECK(transport->keys().at(0) == "key-123");
}

TEST_CASE("the remote formalizer hands the proof failure back to the endpoint") {
  TempPromptDir prompts;
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<std::optional<HttpReply>>{chat_reply(kKdGappedPayload),
                                            chat_reply(kKdPayload)});
  auto remote = make_formalizer(remote_spec(prompts), transport);

  const CaseOutcome out = run_case(kd_problem(), LogicId::KD, *remote,
                                   fixed_clock_options());
  CHECK(out.status == CaseStatus::Verified);
  CHECK(out.iterations_used == 1);

  const auto bodies = transport->bodies();
  REQUIRE(bodies.size() == 2);
  const std::string repair_prompt = request_prompt(bodies[1]);
  CHECK(repair_prompt.find("FIX") != std::string::npos);
  CHECK(repair_prompt.find("Modal Axiom not satisfied") != std::string::npos);
  CHECK(repair_prompt.find("Counterexample:") != std::string::npos);
}

TEST_CASE("an unreachable endpoint is a timeout, never a syntax failure") {
  TempPromptDir prompts;
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<std::optional<HttpReply>>{std::nullopt});
  FormalizerSpec spec = remote_spec(prompts);
  auto remote = make_formalizer(spec, transport);

  const FormalizeResult r = remote->run(kd_problem(), LogicId::KD, nullptr);
  REQUIRE(std::holds_alternative<FormalizeTransportError>(r));
  const FormalizeTransportError& err = std::get<FormalizeTransportError>(r);
  CHECK(err.attempts == spec.retries + 1);
  CHECK(err.detail == "connection failed after 3 attempts");

  const CaseOutcome out = run_case(kd_problem(), LogicId::KD, *remote,
                                   fixed_clock_options());
  CHECK(out.status == CaseStatus::Timeout);
  CHECK(out.iterations_used == 0);
  CHECK(out.error_category.empty());
  REQUIRE(out.trace.size() == 1);
  CHECK(out.trace[0].note.find("connection failed") != std::string::npos);
}

TEST_CASE("server errors burn the retry budget before succeeding or giving up") {
  TempPromptDir prompts;

  SUBCASE("a late success still counts") {
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<std::optional<HttpReply>>{HttpReply{500, "oops"},
                                              HttpReply{502, "bad gateway"},
                                              chat_reply(kKdPayload)});
    auto remote = make_formalizer(remote_spec(prompts), transport);
    const FormalizeResult r = remote->run(kd_problem(), LogicId::KD, nullptr);
    CHECK(std::holds_alternative<Formalization>(r));
    CHECK(transport->bodies().size() == 3);
  }
  SUBCASE("persistent server errors name the last status") {
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<std::optional<HttpReply>>{HttpReply{500, "oops"}});
    auto remote = make_formalizer(remote_spec(prompts), transport);
    const FormalizeResult r = remote->run(kd_problem(), LogicId::KD, nullptr);
    REQUIRE(std::holds_alternative<FormalizeTransportError>(r));
    CHECK(std::get<FormalizeTransportError>(r).detail ==
          "endpoint answered status 500 after 3 attempts");
  }
}

TEST_CASE("malformed replies are syntactic errors with a located message") {
  TempPromptDir prompts;
  auto reply_error_of = [&](const std::string& body) {
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<std::optional<HttpReply>>{HttpReply{200, body}});
    auto remote = make_formalizer(remote_spec(prompts), transport);
    const FormalizeResult r = remote->run(kd_problem(), LogicId::KD, nullptr);
    REQUIRE(std::holds_alternative<FormalizeSyntaxError>(r));
    return std::get<FormalizeSyntaxError>(r);
  };
  auto content_reply = [](const std::string& content) {
    nlohmann::json message = {{"role", "assistant"}, {"content", content}};
    nlohmann::json body = {{"choices", nlohmann::json::array({{{"message", message}}})}};
    return body.dump();
  };

  FormalizeSyntaxError err = reply_error_of("it fell over");
  CHECK(err.field == "reply");
  CHECK(err.error.message == "reply is not valid JSON");
  CHECK(err.error.category == ParseErrorCategory::Grammar);

  err = reply_error_of(R"({"choices":[]})");
  CHECK(err.error.message == "reply is not chat-completion shaped");

  err = reply_error_of(content_reply("no block here"));
  CHECK(err.error.message == "reply contains no fenced formula block");

  err = reply_error_of(content_reply("```theory: p"));
  CHECK(err.error.message == "unterminated fence in reply");

  err = reply_error_of(content_reply("```\ntheory: p\n"));
  CHECK(err.error.message == "unterminated fence in reply");

  err = reply_error_of(content_reply("```\ntheory: p\n```"));
  CHECK(err.error.message == "formula block has no goal line");

  err = reply_error_of(content_reply("```\ngoal: p\ngoal: q\n```"));
  CHECK(err.error.message == "more than one goal line in formula block");

  err = reply_error_of(content_reply("```\nby the way\n```"));
  CHECK(err.error.message == "unrecognized formula block line (want theory:/step:/goal:)");

  err = reply_error_of(content_reply("```\ntheory: p\ngoal: Shelves(ines)\n```"));
  CHECK(err.field == "goal");
  CHECK(err.error.category == ParseErrorCategory::SignatureViolation);

  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<std::optional<HttpReply>>{HttpReply{200, content_reply("no block")}});
  auto remote = make_formalizer(remote_spec(prompts), transport);
  const CaseOutcome out = run_case(kd_problem(), LogicId::KD, *remote,
                                   fixed_clock_options());
  CHECK(out.status == CaseStatus::SyntacticError);
  CHECK(out.error_category == "grammar");
}

TEST_CASE("one gateway slot serializes concurrent requests") {
  TempPromptDir prompts;
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<std::optional<HttpReply>>{chat_reply(kKdPayload)}, 15);
  FormalizerSpec spec = remote_spec(prompts);
  spec.max_in_flight = 1;
  auto remote = make_formalizer(spec, transport);

  const ProblemDoc p = kd_problem();
  std::vector<std::thread> workers;
  for (int i = 0; i < 4; ++i)
    workers.emplace_back([&] {
      const FormalizeResult r = remote->run(p, LogicId::KD, nullptr);
      CHECK(std::holds_alternative<Formalization>(r));
    });
  for (std::thread& w : workers) w.join();

  CHECK(transport->bodies().size() == 4);
  CHECK(transport->max_in_flight() == 1);
}

TEST_CASE("the remote formalizer needs an endpoint and a full template set") {
  TempPromptDir prompts;
  ::unsetenv("LOGIPARAM_LLM_URL");
  ::unsetenv("LOGIPARAM_LLM_KEY");

  FormalizerSpec spec = remote_spec(prompts);
  spec.base_url.clear();
  CHECK_THROWS_WITH_AS(make_formalizer(spec), doctest::Contains("needs an endpoint"),
                       std::invalid_argument);

  ::setenv("LOGIPARAM_LLM_URL", "http://from-env.invalid", 1);
  CHECK_NOTHROW(make_formalizer(spec, std::make_shared<ScriptedTransport>(
                                          std::vector<std::optional<HttpReply>>{})));
  ::unsetenv("LOGIPARAM_LLM_URL");

  FormalizerSpec missing = remote_spec(prompts);
  missing.prompt_dir = (prompts.path / "nowhere").string();
  CHECK_THROWS_WITH_AS(make_formalizer(missing),
                       doctest::Contains("missing prompt template"), std::invalid_argument);
}

TEST_CASE("prompt rendering numbers the explanation and keeps the repair stage optional") {
  TempPromptDir prompts;
  FormalizerSpec spec = remote_spec(prompts);
  const ProblemDoc p = kd_problem();

  const std::string plain = render_prompt(spec, p, LogicId::KD, nullptr);
  CHECK(plain.find("KW Maya borrowed a novel and the loan ran out.") != std::string::npos);
  CHECK(plain.find("1. The loan on the borrowed novel has run out.") != std::string::npos);
  CHECK(plain.find("2. Expired loans on borrowed items must be returned.") !=
        std::string::npos);
  CHECK(plain.find("SK") != std::string::npos);
  CHECK(plain.find("FIX") == std::string::npos);
  CHECK(plain.find("{{") == std::string::npos);

  Feedback fb;
  fb.kind = FeedbackKind::MissingBridge;
  fb.guidance = "Add the bridge borrowed & loan_expired -> O(return_item).";
  const std::string repair = render_prompt(spec, p, LogicId::KD, &fb);
  CHECK(repair.find("FIX Add the bridge") != std::string::npos);
  CHECK(repair.find("{{") == std::string::npos);
}

TEST_CASE("the shipped template set covers every logic and stage") {
  const std::string dir = LOGIPARAM_PROMPTS_DIR;
  const ProblemDoc p = kd_problem();
  Feedback fb;
  fb.kind = FeedbackKind::MissingBridge;
  fb.guidance = "sample guidance";

  for (LogicId logic : {LogicId::FOL, LogicId::KD, LogicId::DDLE, LogicId::DDL_CJ}) {
    for (const char* stage : {"keywords", "formalize", "sketch", "refine"})
      CHECK_NOTHROW(prompt_template_path(dir, logic, stage));
    FormalizerSpec spec;
    spec.kind = FormalizerKind::RemoteLlm;
    spec.prompt_dir = dir;
    const std::string rendered = render_prompt(spec, p, logic, &fb);
    CHECK(rendered.find("{{") == std::string::npos);
    CHECK(rendered.find(p.premise) != std::string::npos);
    CHECK(rendered.find(p.hypothesis) != std::string::npos);
    CHECK(rendered.find("sample guidance") != std::string::npos);
    CHECK(rendered.find("theory:") != std::string::npos);
    CHECK(rendered.find("goal:") != std::string::npos);
  }
}

TEST_CASE("case traces render one block per iteration") {
  const ProblemDoc p = kd_problem();
  FormalizerSpec spec;
  spec.kind = FormalizerKind::GapInjectingMock;
  auto mock = make_formalizer(spec);
  const CaseOutcome out = run_case(p, LogicId::KD, *mock, fixed_clock_options());

  const std::string text = dump_case_outcome(out);
  CHECK(text.find("case: borrowed-book\n") != std::string::npos);
  CHECK(text.find("domain: commonsense\n") != std::string::npos);
  CHECK(text.find("logic: kd\n") != std::string::npos);
  CHECK(text.find("formalizer: gap-injecting-mock\n") != std::string::npos);
  CHECK(text.find("status: Verified\n") != std::string::npos);
  CHECK(text.find("iterations: 1\n") != std::string::npos);
  CHECK(text.find("iteration 0:\n") != std::string::npos);
  CHECK(text.find("iteration 1:\n") != std::string::npos);
  CHECK(text.find("  consistency: Consistent\n") != std::string::npos);
  CHECK(text.find("  failed-index: 1\n") != std::string::npos);
  CHECK(text.find("  feedback: missing-bridge\n") != std::string::npos);
  CHECK(text.find("    Modal Axiom not satisfied") != std::string::npos);
  CHECK(text.find("  theory[2]: borrowed & loan_expired -> O(return_item)\n") !=
        std::string::npos);
}
