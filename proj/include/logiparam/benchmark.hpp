#pragma once

#include <map>
#include <string>
#include <vector>

#include "logiparam/pipeline.hpp"

namespace logiparam {

// Dataset ingestion. Failures never abort the load; every unreadable or malformed file
// contributes a path-prefixed message instead, and duplicate case ids across files are
// reported with both file paths.
struct DatasetLoad {
  std::vector<ProblemDoc> cases;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

// path names one problem file or a directory whose *.json children (sorted by name) are
// problem files.
DatasetLoad load_dataset(const std::string& path);

std::map<Domain, int> domain_histogram(const std::vector<ProblemDoc>& cases);

// One aggregation cell per (logic, formalizer, domain). Raw counts are kept so cells
// aggregate and serialize exactly; the derived rates are computed on demand.
struct MetricsKey {
  LogicId logic = LogicId::KD;
  std::string formalizer;
  Domain domain = Domain::Classical;

  bool operator<(const MetricsKey& o) const;
  bool operator==(const MetricsKey& o) const = default;
};

struct MetricsCell {
  int cases = 0;
  int valid = 0;          // Verified or VerifiedUpToBound
  int syntax_errors = 0;
  std::int64_t refinement_total = 0;  // summed iterations_used over every case
  std::int64_t solve_ms_valid = 0;    // summed solving time over valid cases only

  double valid_pct() const;
  double avg_iterations() const;
  double avg_solve_ms() const;  // averaged over valid cases; 0 when there are none
  double syntax_error_pct() const;

  bool operator==(const MetricsCell& o) const = default;
};

struct MetricsTable {
  std::map<MetricsKey, MetricsCell> cells;

  bool operator==(const MetricsTable& o) const = default;
};

// Folds a per-case log into the table; the table is always reproducible from the log.
MetricsTable aggregate(const std::vector<CaseOutcome>& log);

struct EvalConfig {
  std::vector<LogicId> logics;
  std::vector<FormalizerSpec> specs;
  PipelineOptions pipeline;
  int jobs = 1;
  // Recorded for reproducibility bookkeeping; the offline mock path is deterministic
  // with or without it.
  unsigned seed = 0;
};

struct EvalRun {
  MetricsTable table;
  // Grid order regardless of worker scheduling: dataset order, then logic, then spec.
  std::vector<CaseOutcome> log;
};

// Runs every (case, logic, formalizer) grid cell through run_case. Mock formalizers
// skip cases that carry no gold formalization for the logic; the remote formalizer runs
// everything. Throws std::invalid_argument when logics or specs is empty.
EvalRun evaluate(const std::vector<ProblemDoc>& dataset, const EvalConfig& config);

enum class ReportFormat { Csv, Json, Markdown };

bool report_format_from_name(const std::string& name, ReportFormat& out);

// CSV columns are a fixed contract: one data row per cell, times in milliseconds,
// percentages and averages to two decimals. JSON keeps the raw counts and round-trips
// through report_from_json. Markdown renders one table per metric (solving time in
// seconds there) plus the per-domain breakdown.
std::string render_report(const MetricsTable& m, ReportFormat format);
void write_report(const MetricsTable& m, ReportFormat format, const std::string& path);
MetricsTable report_from_json(const std::string& text);

// One structured-text record per case, in log order.
std::string render_case_log(const std::vector<CaseOutcome>& log);

}  // namespace logiparam
