#include "logiparam/logiparam.h"

#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "logiparam/benchmark.hpp"

using namespace logiparam;

struct lgp_engine {
  ProverOptions prover;
  int max_refinements = 3;
  std::int64_t case_budget_ms = 60000;
  bool deterministic_timing = false;
  int jobs = 1;
  unsigned seed = 0;
  int gap_index = -1;
  std::string prompt_dir = "prompts";
  std::string llm_url;
  std::string llm_key;
  std::string llm_model = "general-chat";
  int max_in_flight = 2;
  int retries = 2;
  int backoff_ms = 250;
  std::string last_error;
};

struct lgp_verdict {
  std::string name;
  std::string detail;
  std::string model_dump;
  bool positive = false;
  bool has_model = false;
  int worlds = 0;
};

struct lgp_case_result {
  std::string status;
  std::string error_category;
  std::string trace;
  int iterations = 0;
  std::int64_t solving_ms = 0;
};

struct lgp_report {
  MetricsTable table;
  std::vector<CaseOutcome> log;
};

namespace {

lgp_status fail(lgp_engine* engine, lgp_status status, std::string message) {
  if (engine) engine->last_error = std::move(message);
  return status;
}

char* copy_out(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

bool parse_int(const std::string& text, long long& out) {
  try {
    size_t used = 0;
    out = std::stoll(text, &used);
    return used == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_flag(const std::string& text, bool& out) {
  if (text == "on" || text == "true" || text == "1") { out = true; return true; }
  if (text == "off" || text == "false" || text == "0") { out = false; return true; }
  return false;
}

lgp_status resolve_logic(lgp_engine* engine, const char* name, LogicId& out) {
  if (!name) return fail(engine, LGP_INVALID_ARGUMENT, "logic name is null");
  if (!logic_from_name(name, out))
    return fail(engine, LGP_INVALID_ARGUMENT,
                "unknown logic '" + std::string(name) +
                    "' (expected fol, kd, ddle or ddl-cj)");
  return LGP_OK;
}

std::string spanned(const ParseError& err) {
  std::ostringstream out;
  out << parse_error_category_name(err.category) << ": " << err.message << " (bytes "
      << err.begin << ".." << err.end << ")";
  return out.str();
}

// One formula per line; '#' starts a comment. Line numbers are 1-based in messages.
lgp_status parse_theory_text(lgp_engine* engine, LogicId logic, const char* text,
                             std::vector<FormulaPtr>& out) {
  if (!text) return fail(engine, LGP_INVALID_ARGUMENT, "theory text is null");
  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const size_t end = line.find_last_not_of(" \t\r");
    const std::string src = line.substr(begin, end - begin + 1);
    ParseResult r = parse_formula(src, logic);
    if (const ParseError* err = std::get_if<ParseError>(&r))
      return fail(engine, LGP_PARSE_ERROR,
                  "line " + std::to_string(lineno) + ": " + spanned(*err) + " in '" + src +
                      "'");
    out.push_back(std::get<FormulaPtr>(r));
  }
  return LGP_OK;
}

lgp_verdict* verdict_from(const Certificate& cert) {
  auto* v = new lgp_verdict;
  v->name = verdict_name(cert.verdict);
  v->detail = cert.detail;
  v->positive = cert.verdict == Verdict::Entailed ||
                cert.verdict == Verdict::EntailedUpToBound ||
                cert.verdict == Verdict::Consistent;
  v->has_model = cert.has_model;
  if (cert.has_model) v->model_dump = dump_model(cert.model);
  v->worlds = cert.worlds_checked;
  return v;
}

PipelineOptions pipeline_options(const lgp_engine& engine) {
  PipelineOptions opts;
  opts.max_refinements = engine.max_refinements;
  opts.prover = engine.prover;
  opts.case_budget_ms = engine.case_budget_ms;
  opts.deterministic_timing = engine.deterministic_timing;
  return opts;
}

lgp_status resolve_formalizer(lgp_engine* engine, const char* name, FormalizerSpec& out) {
  if (!name) return fail(engine, LGP_INVALID_ARGUMENT, "formalizer name is null");
  FormalizerKind kind;
  if (!formalizer_kind_from_name(name, kind))
    return fail(engine, LGP_INVALID_ARGUMENT,
                "unknown formalizer '" + std::string(name) +
                    "' (expected gold-mock, gap-injecting-mock or remote-llm)");
  out.kind = kind;
  out.gap_index = engine->gap_index;
  out.base_url = engine->llm_url;
  out.api_key = engine->llm_key;
  out.model = engine->llm_model;
  out.prompt_dir = engine->prompt_dir;
  out.max_in_flight = engine->max_in_flight;
  out.retries = engine->retries;
  out.backoff_ms = engine->backoff_ms;
  return LGP_OK;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const size_t b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const size_t e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename Fn>
lgp_status guarded(lgp_engine* engine, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(engine, LGP_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(engine, LGP_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(engine, LGP_INTERNAL_ERROR, e.what());
  }
}

}  // namespace

extern "C" {

const char* lgp_version(void) { return "0.1.0"; }

lgp_engine* lgp_engine_new(void) { return new lgp_engine; }

void lgp_engine_free(lgp_engine* engine) { delete engine; }

const char* lgp_last_error(const lgp_engine* engine) {
  return engine ? engine->last_error.c_str() : "";
}

lgp_status lgp_set_option(lgp_engine* engine, const char* name, const char* value) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!name || !value) return fail(engine, LGP_INVALID_ARGUMENT, "option name or value is null");
  const std::string key = name;
  const std::string text = value;

  if (key == "prompt-dir") { engine->prompt_dir = text; return LGP_OK; }
  if (key == "llm-url") { engine->llm_url = text; return LGP_OK; }
  if (key == "llm-key") { engine->llm_key = text; return LGP_OK; }
  if (key == "llm-model") { engine->llm_model = text; return LGP_OK; }
  if (key == "deterministic-timing") {
    bool flag;
    if (!parse_flag(text, flag))
      return fail(engine, LGP_INVALID_ARGUMENT,
                  "option 'deterministic-timing' wants on/off, got '" + text + "'");
    engine->deterministic_timing = flag;
    return LGP_OK;
  }

  long long number = 0;
  if (!parse_int(text, number))
    return fail(engine, LGP_INVALID_ARGUMENT,
                "option '" + key + "' wants an integer, got '" + text + "'");
  auto set_positive_int = [&](int& slot) {
    if (number < 1 || number > 1000000) {
      fail(engine, LGP_INVALID_ARGUMENT, "option '" + key + "' is out of range");
      return false;
    }
    slot = static_cast<int>(number);
    return true;
  };
  if (key == "max-worlds-kd")
    return set_positive_int(engine->prover.max_worlds_kd) ? LGP_OK : LGP_INVALID_ARGUMENT;
  if (key == "max-worlds-ddle")
    return set_positive_int(engine->prover.max_worlds_ddle) ? LGP_OK : LGP_INVALID_ARGUMENT;
  if (key == "max-worlds-cj")
    return set_positive_int(engine->prover.max_worlds_cj) ? LGP_OK : LGP_INVALID_ARGUMENT;
  if (key == "jobs")
    return set_positive_int(engine->jobs) ? LGP_OK : LGP_INVALID_ARGUMENT;
  if (key == "max-in-flight")
    return set_positive_int(engine->max_in_flight) ? LGP_OK : LGP_INVALID_ARGUMENT;
  if (key == "check-budget-ms") {
    engine->prover.check_budget_ms = number;
    return LGP_OK;
  }
  if (key == "case-budget-ms") {
    engine->case_budget_ms = number;
    return LGP_OK;
  }
  if (key == "refinements") {
    if (number < 0 || number > 1000)
      return fail(engine, LGP_INVALID_ARGUMENT, "option 'refinements' is out of range");
    engine->max_refinements = static_cast<int>(number);
    return LGP_OK;
  }
  if (key == "retries") {
    if (number < 0 || number > 100)
      return fail(engine, LGP_INVALID_ARGUMENT, "option 'retries' is out of range");
    engine->retries = static_cast<int>(number);
    return LGP_OK;
  }
  if (key == "backoff-ms") {
    if (number < 0)
      return fail(engine, LGP_INVALID_ARGUMENT, "option 'backoff-ms' is out of range");
    engine->backoff_ms = static_cast<int>(number);
    return LGP_OK;
  }
  if (key == "seed") {
    engine->seed = static_cast<unsigned>(number);
    return LGP_OK;
  }
  if (key == "gap-index") {
    engine->gap_index = static_cast<int>(number);
    return LGP_OK;
  }
  return fail(engine, LGP_INVALID_ARGUMENT, "unknown option '" + key + "'");
}

lgp_status lgp_check_formula(lgp_engine* engine, const char* logic, const char* source,
                             char** pretty_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  LogicId id;
  if (lgp_status s = resolve_logic(engine, logic, id); s != LGP_OK) return s;
  if (!source) return fail(engine, LGP_INVALID_ARGUMENT, "formula source is null");
  return guarded(engine, [&] {
    ParseResult r = parse_formula(source, id);
    if (const ParseError* err = std::get_if<ParseError>(&r))
      return fail(engine, LGP_PARSE_ERROR, spanned(*err));
    if (pretty_out) *pretty_out = copy_out(pretty(std::get<FormulaPtr>(r)));
    return LGP_OK;
  });
}

lgp_status lgp_consistency(lgp_engine* engine, const char* logic, const char* theory_text,
                           lgp_verdict** verdict_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!verdict_out) return fail(engine, LGP_INVALID_ARGUMENT, "verdict output is null");
  LogicId id;
  if (lgp_status s = resolve_logic(engine, logic, id); s != LGP_OK) return s;
  return guarded(engine, [&] {
    std::vector<FormulaPtr> theory;
    if (lgp_status s = parse_theory_text(engine, id, theory_text, theory); s != LGP_OK)
      return s;
    const Budget budget = engine->case_budget_ms > 0 ? Budget::from_ms(engine->case_budget_ms)
                                                     : Budget::unlimited();
    *verdict_out = verdict_from(check_consistency(id, theory, engine->prover, budget));
    return LGP_OK;
  });
}

lgp_status lgp_entailment(lgp_engine* engine, const char* logic, const char* theory_text,
                          const char* goal_source, lgp_verdict** verdict_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!verdict_out) return fail(engine, LGP_INVALID_ARGUMENT, "verdict output is null");
  LogicId id;
  if (lgp_status s = resolve_logic(engine, logic, id); s != LGP_OK) return s;
  if (!goal_source) return fail(engine, LGP_INVALID_ARGUMENT, "goal source is null");
  return guarded(engine, [&] {
    std::vector<FormulaPtr> theory;
    if (lgp_status s = parse_theory_text(engine, id, theory_text, theory); s != LGP_OK)
      return s;
    ParseResult g = parse_formula(goal_source, id);
    if (const ParseError* err = std::get_if<ParseError>(&g))
      return fail(engine, LGP_PARSE_ERROR, "goal: " + spanned(*err));
    const Budget budget = engine->case_budget_ms > 0 ? Budget::from_ms(engine->case_budget_ms)
                                                     : Budget::unlimited();
    *verdict_out = verdict_from(
        check_entailment(id, theory, std::get<FormulaPtr>(g), engine->prover, budget));
    return LGP_OK;
  });
}

const char* lgp_verdict_name(const lgp_verdict* verdict) {
  return verdict ? verdict->name.c_str() : "";
}
const char* lgp_verdict_detail(const lgp_verdict* verdict) {
  return verdict ? verdict->detail.c_str() : "";
}
int lgp_verdict_is_positive(const lgp_verdict* verdict) {
  return verdict && verdict->positive ? 1 : 0;
}
int lgp_verdict_has_model(const lgp_verdict* verdict) {
  return verdict && verdict->has_model ? 1 : 0;
}
const char* lgp_verdict_model(const lgp_verdict* verdict) {
  return verdict ? verdict->model_dump.c_str() : "";
}
int lgp_verdict_worlds(const lgp_verdict* verdict) { return verdict ? verdict->worlds : 0; }
void lgp_verdict_free(lgp_verdict* verdict) { delete verdict; }

lgp_status lgp_verify_case(lgp_engine* engine, const char* problem_path, const char* logic,
                           const char* formalizer, const char* case_id,
                           lgp_case_result** result_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!result_out) return fail(engine, LGP_INVALID_ARGUMENT, "case result output is null");
  if (!problem_path) return fail(engine, LGP_INVALID_ARGUMENT, "problem path is null");
  LogicId id;
  if (lgp_status s = resolve_logic(engine, logic, id); s != LGP_OK) return s;
  FormalizerSpec spec;
  if (lgp_status s = resolve_formalizer(engine, formalizer, spec); s != LGP_OK) return s;

  return guarded(engine, [&] {
    const DatasetLoad load = load_dataset(problem_path);
    if (!load.ok()) {
      std::ostringstream out;
      for (size_t i = 0; i < load.errors.size(); ++i)
        out << (i ? "; " : "") << load.errors[i];
      return fail(engine, LGP_PARSE_ERROR, out.str());
    }
    const ProblemDoc* chosen = nullptr;
    if (case_id) {
      for (const ProblemDoc& doc : load.cases)
        if (doc.id == case_id) chosen = &doc;
    } else if (load.cases.size() == 1) {
      chosen = &load.cases.front();
    }
    if (!chosen) {
      std::ostringstream out;
      if (case_id)
        out << "no case with id '" << case_id << "'";
      else
        out << "the file holds " << load.cases.size() << " cases; pick one";
      out << " (available:";
      for (const ProblemDoc& doc : load.cases) out << " " << doc.id;
      out << ")";
      return fail(engine, LGP_INVALID_ARGUMENT, out.str());
    }

    auto made = make_formalizer(spec);
    const CaseOutcome outcome = run_case(*chosen, id, *made, pipeline_options(*engine));
    auto* result = new lgp_case_result;
    result->status = case_status_name(outcome.status);
    result->error_category = outcome.error_category;
    result->trace = dump_case_outcome(outcome);
    result->iterations = outcome.iterations_used;
    result->solving_ms = outcome.solving_ms;
    *result_out = result;
    return LGP_OK;
  });
}

const char* lgp_case_status_name(const lgp_case_result* result) {
  return result ? result->status.c_str() : "";
}
int lgp_case_iterations(const lgp_case_result* result) {
  return result ? result->iterations : 0;
}
int64_t lgp_case_solving_ms(const lgp_case_result* result) {
  return result ? result->solving_ms : 0;
}
const char* lgp_case_error_category(const lgp_case_result* result) {
  return result ? result->error_category.c_str() : "";
}
const char* lgp_case_trace(const lgp_case_result* result) {
  return result ? result->trace.c_str() : "";
}
void lgp_case_result_free(lgp_case_result* result) { delete result; }

lgp_status lgp_evaluate(lgp_engine* engine, const char* dataset_path,
                        const char* logics_csv, const char* formalizers_csv,
                        lgp_report** report_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!report_out) return fail(engine, LGP_INVALID_ARGUMENT, "report output is null");
  if (!dataset_path) return fail(engine, LGP_INVALID_ARGUMENT, "dataset path is null");
  if (!logics_csv || !formalizers_csv)
    return fail(engine, LGP_INVALID_ARGUMENT, "logic or formalizer list is null");

  EvalConfig config;
  for (const std::string& name : split_csv(logics_csv)) {
    LogicId id;
    if (lgp_status s = resolve_logic(engine, name.c_str(), id); s != LGP_OK) return s;
    config.logics.push_back(id);
  }
  for (const std::string& name : split_csv(formalizers_csv)) {
    FormalizerSpec spec;
    if (lgp_status s = resolve_formalizer(engine, name.c_str(), spec); s != LGP_OK)
      return s;
    config.specs.push_back(spec);
  }
  if (config.logics.empty())
    return fail(engine, LGP_INVALID_ARGUMENT, "logic list is empty");
  if (config.specs.empty())
    return fail(engine, LGP_INVALID_ARGUMENT, "formalizer list is empty");
  config.pipeline = pipeline_options(*engine);
  config.jobs = engine->jobs;
  config.seed = engine->seed;

  return guarded(engine, [&] {
    const DatasetLoad load = load_dataset(dataset_path);
    if (!load.ok()) {
      std::ostringstream out;
      for (size_t i = 0; i < load.errors.size(); ++i)
        out << (i ? "; " : "") << load.errors[i];
      return fail(engine, LGP_PARSE_ERROR, out.str());
    }
    EvalRun run = evaluate(load.cases, config);
    auto* report = new lgp_report;
    report->table = std::move(run.table);
    report->log = std::move(run.log);
    *report_out = report;
    return LGP_OK;
  });
}

lgp_status lgp_report_render(lgp_engine* engine, const lgp_report* report,
                             const char* format, char** text_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!report || !text_out)
    return fail(engine, LGP_INVALID_ARGUMENT, "report or output is null");
  ReportFormat f;
  if (!format || !report_format_from_name(format, f))
    return fail(engine, LGP_INVALID_ARGUMENT,
                "unknown report format '" + std::string(format ? format : "") +
                    "' (expected csv, json or markdown)");
  return guarded(engine, [&] {
    *text_out = copy_out(render_report(report->table, f));
    return LGP_OK;
  });
}

lgp_status lgp_report_case_log(lgp_engine* engine, const lgp_report* report,
                               char** text_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!report || !text_out)
    return fail(engine, LGP_INVALID_ARGUMENT, "report or output is null");
  return guarded(engine, [&] {
    *text_out = copy_out(render_case_log(report->log));
    return LGP_OK;
  });
}

int lgp_report_case_count(const lgp_report* report) {
  return report ? static_cast<int>(report->log.size()) : 0;
}

lgp_status lgp_report_case_trace(lgp_engine* engine, const lgp_report* report, int index,
                                 char** id_out, char** text_out) {
  if (!engine) return LGP_INVALID_ARGUMENT;
  if (!report) return fail(engine, LGP_INVALID_ARGUMENT, "report is null");
  if (index < 0 || index >= static_cast<int>(report->log.size()))
    return fail(engine, LGP_INVALID_ARGUMENT,
                "case index " + std::to_string(index) + " is out of range");
  return guarded(engine, [&] {
    const CaseOutcome& outcome = report->log[static_cast<size_t>(index)];
    if (id_out)
      *id_out = copy_out(outcome.case_id + "__" + logic_name(outcome.logic) + "__" +
                         outcome.formalizer);
    if (text_out) *text_out = copy_out(dump_case_outcome(outcome));
    return LGP_OK;
  });
}

void lgp_report_free(lgp_report* report) { delete report; }

void lgp_string_free(char* text) { delete[] text; }

}  // extern "C"
