#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "logiparam/logiparam.h"

namespace {

constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;

struct EngineHandle {
  lgp_engine* ptr;
  EngineHandle() : ptr(lgp_engine_new()) {}
  ~EngineHandle() { lgp_engine_free(ptr); }
};

struct EngineFlags {
  int max_worlds_kd = 0;
  int max_worlds_ddle = 0;
  int max_worlds_cj = 0;
  long long check_budget_ms = 0;
  long long case_budget_ms = 0;
  std::string prompt_dir;
  std::string llm_url;
  std::string llm_key;
  std::string llm_model;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& flags) {
  cmd->add_option("--max-worlds-kd", flags.max_worlds_kd,
                  "World bound for the serial modal logic");
  cmd->add_option("--max-worlds-ddle", flags.max_worlds_ddle,
                  "World bound for the betterness-order logic");
  cmd->add_option("--max-worlds-cj", flags.max_worlds_cj,
                  "World bound for the context-obligation logic");
  cmd->add_option("--check-budget-ms", flags.check_budget_ms,
                  "Budget for a single logical check");
  cmd->add_option("--case-budget-ms", flags.case_budget_ms, "Budget for a whole case");
  cmd->add_option("--prompt-dir", flags.prompt_dir, "Prompt template directory");
  cmd->add_option("--llm-url", flags.llm_url,
                  "Chat-completion endpoint (or LOGIPARAM_LLM_URL)");
  cmd->add_option("--llm-key", flags.llm_key, "API key (or LOGIPARAM_LLM_KEY)");
  cmd->add_option("--llm-model", flags.llm_model, "Model name for remote formalization");
}

bool set_option_checked(lgp_engine* engine, const char* name, const std::string& value) {
  if (lgp_set_option(engine, name, value.c_str()) != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    return false;
  }
  return true;
}

bool apply_engine_flags(lgp_engine* engine, const EngineFlags& flags) {
  auto apply_int = [&](const char* name, long long v) {
    return v == 0 || set_option_checked(engine, name, std::to_string(v));
  };
  auto apply_text = [&](const char* name, const std::string& v) {
    return v.empty() || set_option_checked(engine, name, v);
  };
  return apply_int("max-worlds-kd", flags.max_worlds_kd) &&
         apply_int("max-worlds-ddle", flags.max_worlds_ddle) &&
         apply_int("max-worlds-cj", flags.max_worlds_cj) &&
         apply_int("check-budget-ms", flags.check_budget_ms) &&
         apply_int("case-budget-ms", flags.case_budget_ms) &&
         apply_text("prompt-dir", flags.prompt_dir) &&
         apply_text("llm-url", flags.llm_url) && apply_text("llm-key", flags.llm_key) &&
         apply_text("llm-model", flags.llm_model);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

std::string owned(char* text) {
  std::string out = text ? text : "";
  lgp_string_free(text);
  return out;
}

void print_verdict(const lgp_verdict* verdict) {
  std::cout << "verdict: " << lgp_verdict_name(verdict) << "\n";
  const std::string detail = lgp_verdict_detail(verdict);
  if (!detail.empty()) std::cout << "detail: " << detail << "\n";
  if (lgp_verdict_has_model(verdict)) {
    std::cout << "model:\n" << lgp_verdict_model(verdict);
    const std::string dump = lgp_verdict_model(verdict);
    if (dump.empty() || dump.back() != '\n') std::cout << "\n";
  }
}

int run_parse(lgp_engine* engine, const std::string& path, const std::string& logic) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitUsage;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  bool any_error = false;
  while (std::getline(lines, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const size_t end = line.find_last_not_of(" \t\r");
    const std::string src = line.substr(begin, end - begin + 1);
    char* pretty = nullptr;
    const lgp_status status = lgp_check_formula(engine, logic.c_str(), src.c_str(), &pretty);
    if (status == LGP_OK) {
      std::cout << lineno << ": ok " << owned(pretty) << "\n";
    } else if (status == LGP_PARSE_ERROR) {
      any_error = true;
      std::cout << lineno << ": error " << lgp_last_error(engine) << "\n";
    } else {
      std::cerr << "error: " << lgp_last_error(engine) << "\n";
      return kExitUsage;
    }
  }
  return any_error ? kExitNegative : 0;
}

int run_consistency(lgp_engine* engine, const std::string& path, const std::string& logic) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitUsage;
  }
  lgp_verdict* verdict = nullptr;
  const lgp_status status =
      lgp_consistency(engine, logic.c_str(), text.c_str(), &verdict);
  if (status != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    return status == LGP_PARSE_ERROR ? kExitNegative : kExitUsage;
  }
  print_verdict(verdict);
  const int code = lgp_verdict_is_positive(verdict) ? 0 : kExitNegative;
  lgp_verdict_free(verdict);
  return code;
}

int run_prove(lgp_engine* engine, const std::string& theory_path, const std::string& goal,
              const std::string& logic) {
  std::string text;
  if (!theory_path.empty() && !read_file(theory_path, text)) {
    std::cerr << "error: cannot read " << theory_path << "\n";
    return kExitUsage;
  }
  lgp_verdict* verdict = nullptr;
  const lgp_status status =
      lgp_entailment(engine, logic.c_str(), text.c_str(), goal.c_str(), &verdict);
  if (status != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    return status == LGP_PARSE_ERROR ? kExitNegative : kExitUsage;
  }
  print_verdict(verdict);
  const int code = lgp_verdict_is_positive(verdict) ? 0 : kExitNegative;
  lgp_verdict_free(verdict);
  return code;
}

int run_verify(lgp_engine* engine, const std::string& path, const std::string& logic,
               const std::string& formalizer, const std::string& case_id, int refinements,
               int gap_index, bool gap_index_set, const std::string& trace_out) {
  if (!set_option_checked(engine, "refinements", std::to_string(refinements)))
    return kExitUsage;
  if (gap_index_set &&
      !set_option_checked(engine, "gap-index", std::to_string(gap_index)))
    return kExitUsage;

  lgp_case_result* result = nullptr;
  const lgp_status status =
      lgp_verify_case(engine, path.c_str(), logic.c_str(), formalizer.c_str(),
                      case_id.empty() ? nullptr : case_id.c_str(), &result);
  if (status != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    return status == LGP_INVALID_ARGUMENT || status == LGP_IO_ERROR ? kExitUsage
                                                                    : kExitNegative;
  }
  const std::string trace = lgp_case_trace(result);
  std::cout << trace;
  if (!trace_out.empty()) {
    if (!write_file(trace_out, trace)) {
      std::cerr << "error: cannot write " << trace_out << "\n";
      lgp_case_result_free(result);
      return kExitUsage;
    }
    std::cout << "trace-file: " << trace_out << "\n";
  }
  const std::string name = lgp_case_status_name(result);
  lgp_case_result_free(result);
  return name == "Verified" || name == "VerifiedUpToBound" ? 0 : kExitNegative;
}

int run_eval(lgp_engine* engine, const std::string& dataset, const std::string& logics,
             const std::string& formalizers, const std::string& out_path,
             const std::string& format, int jobs, unsigned seed, bool wall_clock,
             const std::string& log_path, const std::string& trace_dir) {
  if (!set_option_checked(engine, "deterministic-timing", wall_clock ? "off" : "on"))
    return kExitUsage;
  if (jobs > 0 && !set_option_checked(engine, "jobs", std::to_string(jobs)))
    return kExitUsage;
  if (!set_option_checked(engine, "seed", std::to_string(seed))) return kExitUsage;

  lgp_report* report = nullptr;
  if (lgp_evaluate(engine, dataset.c_str(), logics.c_str(), formalizers.c_str(),
                   &report) != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    return kExitUsage;
  }

  char* text = nullptr;
  if (lgp_report_render(engine, report, format.c_str(), &text) != LGP_OK) {
    std::cerr << "error: " << lgp_last_error(engine) << "\n";
    lgp_report_free(report);
    return kExitUsage;
  }
  const std::string rendered = owned(text);
  if (out_path.empty()) {
    std::cout << rendered;
  } else if (!write_file(out_path, rendered)) {
    std::cerr << "error: cannot write " << out_path << "\n";
    lgp_report_free(report);
    return kExitUsage;
  }

  if (!log_path.empty()) {
    if (lgp_report_case_log(engine, report, &text) != LGP_OK ||
        !write_file(log_path, owned(text))) {
      std::cerr << "error: cannot write " << log_path << "\n";
      lgp_report_free(report);
      return kExitUsage;
    }
  }
  if (!trace_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(trace_dir, ec);
    for (int i = 0; i < lgp_report_case_count(report); ++i) {
      char* id = nullptr;
      char* body = nullptr;
      if (lgp_report_case_trace(engine, report, i, &id, &body) != LGP_OK) {
        std::cerr << "error: " << lgp_last_error(engine) << "\n";
        lgp_report_free(report);
        return kExitUsage;
      }
      const std::string file =
          (std::filesystem::path(trace_dir) / (owned(id) + ".txt")).string();
      if (!write_file(file, owned(body))) {
        std::cerr << "error: cannot write " << file << "\n";
        lgp_report_free(report);
        return kExitUsage;
      }
    }
  }

  std::cout << "grid-cases: " << lgp_report_case_count(report) << "\n";
  if (!out_path.empty()) std::cout << "report: " << out_path << "\n";
  lgp_report_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logic-parametric verification of natural-language explanations"};
  app.set_version_flag("--version", std::string(lgp_version()));
  app.require_subcommand(1);

  std::string logic = "kd";
  EngineFlags flags;

  auto* parse_cmd = app.add_subcommand("parse", "Parse formulas, one per line");
  std::string parse_file;
  parse_cmd->add_option("file", parse_file, "Formula file")->required();
  parse_cmd->add_option("--logic", logic, "fol, kd, ddle or ddl-cj");

  auto* cons_cmd = app.add_subcommand("consistency", "Check a theory for a model");
  std::string cons_file;
  cons_cmd->add_option("theory-file", cons_file, "Theory, one formula per line")
      ->required();
  cons_cmd->add_option("--logic", logic, "fol, kd, ddle or ddl-cj");
  add_engine_flags(cons_cmd, flags);

  auto* prove_cmd = app.add_subcommand("prove", "Check that a theory entails a goal");
  std::string prove_file;
  std::string goal;
  prove_cmd->add_option("theory-file", prove_file,
                        "Theory, one formula per line (omit for an empty theory)");
  prove_cmd->add_option("--goal", goal, "Goal formula")->required();
  prove_cmd->add_option("--logic", logic, "fol, kd, ddle or ddl-cj");
  add_engine_flags(prove_cmd, flags);

  auto* verify_cmd =
      app.add_subcommand("verify", "Run one case through formalize, check and refine");
  std::string verify_file;
  std::string formalizer = "gold-mock";
  std::string case_id;
  std::string trace_out;
  int refinements = 3;
  int gap_index = -1;
  verify_cmd->add_option("problem-file", verify_file, "Problem case file")->required();
  verify_cmd->add_option("--logic", logic, "fol, kd, ddle or ddl-cj");
  verify_cmd->add_option("--formalizer", formalizer,
                         "gold-mock, gap-injecting-mock or remote-llm");
  verify_cmd->add_option("--case", case_id, "Case id when the file holds several");
  verify_cmd->add_option("--t,--refinements", refinements, "Refinement rounds");
  auto* gap_opt =
      verify_cmd->add_option("--gap-index", gap_index, "Theory formula the gap mock drops");
  verify_cmd->add_option("--trace-out", trace_out, "Also write the trace to this file");
  add_engine_flags(verify_cmd, flags);

  auto* eval_cmd = app.add_subcommand("eval", "Run a dataset across logics and formalizers");
  std::string dataset;
  std::string logics = "kd";
  std::string formalizers = "gold-mock";
  std::string out_path;
  std::string format = "csv";
  std::string log_path;
  std::string trace_dir;
  int jobs = 0;
  unsigned seed = 0;
  bool wall_clock = false;
  eval_cmd->add_option("dataset", dataset, "Problem file or directory")->required();
  eval_cmd->add_option("--logics", logics, "Comma-separated logic names");
  eval_cmd->add_option("--formalizer,--formalizers", formalizers,
                       "Comma-separated formalizer names");
  eval_cmd->add_option("--out", out_path, "Report file (stdout when omitted)");
  eval_cmd->add_option("--format", format, "csv, json or markdown");
  eval_cmd->add_option("--jobs", jobs, "Parallel workers");
  eval_cmd->add_option("--seed", seed, "Recorded run seed");
  eval_cmd->add_flag("--wall-clock-timing", wall_clock,
                     "Report wall time instead of deterministic solver-derived time");
  eval_cmd->add_option("--log", log_path, "Write the per-case log here");
  eval_cmd->add_option("--trace-dir", trace_dir, "Write one trace file per grid case");
  add_engine_flags(eval_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  EngineHandle engine;
  if (!apply_engine_flags(engine.ptr, flags)) return kExitUsage;

  if (parse_cmd->parsed()) return run_parse(engine.ptr, parse_file, logic);
  if (cons_cmd->parsed()) return run_consistency(engine.ptr, cons_file, logic);
  if (prove_cmd->parsed()) return run_prove(engine.ptr, prove_file, goal, logic);
  if (verify_cmd->parsed())
    return run_verify(engine.ptr, verify_file, logic, formalizer, case_id, refinements,
                      gap_index, gap_opt->count() > 0, trace_out);
  if (eval_cmd->parsed())
    return run_eval(engine.ptr, dataset, logics, formalizers, out_path, format, jobs, seed,
                    wall_clock, log_path, trace_dir);
  return kExitUsage;
}
