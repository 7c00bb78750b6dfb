#include "logiparam/benchmark.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace logiparam {

namespace {

std::string format2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string read_file(const std::string& path, std::string& error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    error = "cannot read file";
    return "";
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

DatasetLoad load_dataset(const std::string& path) {
  DatasetLoad load;
  std::vector<std::string> files;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(path, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) load.errors.push_back(path + ": no .json problem files found");
  } else if (std::filesystem::exists(path, ec)) {
    files.push_back(path);
  } else {
    load.errors.push_back(path + ": no such file or directory");
  }

  std::map<std::string, std::string> first_file_of_id;
  for (const std::string& file : files) {
    std::string io_error;
    const std::string text = read_file(file, io_error);
    if (!io_error.empty()) {
      load.errors.push_back(file + ": " + io_error);
      continue;
    }
    ProblemsResult parsed = parse_problems(text);
    if (const ParseError* err = std::get_if<ParseError>(&parsed)) {
      load.errors.push_back(file + ": " + err->message);
      continue;
    }
    for (ProblemDoc& doc : std::get<std::vector<ProblemDoc>>(parsed)) {
      auto [it, inserted] = first_file_of_id.emplace(doc.id, file);
      if (!inserted) {
        load.errors.push_back("duplicate case id '" + doc.id + "' in " + it->second +
                              " and " + file);
        continue;
      }
      load.cases.push_back(std::move(doc));
    }
  }
  return load;
}

std::map<Domain, int> domain_histogram(const std::vector<ProblemDoc>& cases) {
  std::map<Domain, int> hist;
  for (const ProblemDoc& doc : cases) ++hist[doc.domain];
  return hist;
}

bool MetricsKey::operator<(const MetricsKey& o) const {
  return std::tuple(static_cast<int>(logic), formalizer, static_cast<int>(domain)) <
         std::tuple(static_cast<int>(o.logic), o.formalizer, static_cast<int>(o.domain));
}

double MetricsCell::valid_pct() const {
  return cases == 0 ? 0.0 : 100.0 * valid / cases;
}

double MetricsCell::avg_iterations() const {
  return cases == 0 ? 0.0 : static_cast<double>(refinement_total) / cases;
}

double MetricsCell::avg_solve_ms() const {
  return valid == 0 ? 0.0 : static_cast<double>(solve_ms_valid) / valid;
}

double MetricsCell::syntax_error_pct() const {
  return cases == 0 ? 0.0 : 100.0 * syntax_errors / cases;
}

MetricsTable aggregate(const std::vector<CaseOutcome>& log) {
  MetricsTable table;
  for (const CaseOutcome& outcome : log) {
    MetricsCell& cell =
        table.cells[MetricsKey{outcome.logic, outcome.formalizer, outcome.domain}];
    ++cell.cases;
    cell.refinement_total += outcome.iterations_used;
    const bool valid = outcome.status == CaseStatus::Verified ||
                       outcome.status == CaseStatus::VerifiedUpToBound;
    if (valid) {
      ++cell.valid;
      cell.solve_ms_valid += outcome.solving_ms;
    }
    if (outcome.status == CaseStatus::SyntacticError) ++cell.syntax_errors;
  }
  return table;
}

EvalRun evaluate(const std::vector<ProblemDoc>& dataset, const EvalConfig& config) {
  if (config.logics.empty()) throw std::invalid_argument("evaluation grid has no logics");
  if (config.specs.empty())
    throw std::invalid_argument("evaluation grid has no formalizers");

  std::vector<std::unique_ptr<Formalizer>> formalizers;
  for (const FormalizerSpec& spec : config.specs)
    formalizers.push_back(make_formalizer(spec));

  struct Task {
    const ProblemDoc* problem;
    LogicId logic;
    size_t spec;
  };
  std::vector<Task> tasks;
  for (const ProblemDoc& problem : dataset) {
    for (LogicId logic : config.logics) {
      for (size_t s = 0; s < config.specs.size(); ++s) {
        const bool mock = config.specs[s].kind != FormalizerKind::RemoteLlm;
        if (mock && !problem.has_gold(logic)) continue;
        tasks.push_back(Task{&problem, logic, s});
      }
    }
  }

  EvalRun run;
  run.log.resize(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      run.log[i] =
          run_case(*task.problem, task.logic, *formalizers[task.spec], config.pipeline);
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  run.table = aggregate(run.log);
  return run;
}

bool report_format_from_name(const std::string& name, ReportFormat& out) {
  if (name == "csv") { out = ReportFormat::Csv; return true; }
  if (name == "json") { out = ReportFormat::Json; return true; }
  if (name == "markdown" || name == "md") { out = ReportFormat::Markdown; return true; }
  return false;
}

namespace {

std::string render_csv(const MetricsTable& m) {
  std::ostringstream out;
  out << "logic,formalizer,domain,cases,valid_pct,avg_iter,avg_solve_ms,syntax_err_pct\n";
  for (const auto& [key, cell] : m.cells) {
    out << logic_name(key.logic) << ',' << key.formalizer << ',' << domain_name(key.domain)
        << ',' << cell.cases << ',' << format2(cell.valid_pct()) << ','
        << format2(cell.avg_iterations()) << ',' << format2(cell.avg_solve_ms()) << ','
        << format2(cell.syntax_error_pct()) << "\n";
  }
  return out.str();
}

std::string render_json(const MetricsTable& m) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, cell] : m.cells) {
    cells.push_back({
        {"logic", logic_name(key.logic)},
        {"formalizer", key.formalizer},
        {"domain", domain_name(key.domain)},
        {"cases", cell.cases},
        {"valid", cell.valid},
        {"syntax_errors", cell.syntax_errors},
        {"refinement_total", cell.refinement_total},
        {"solve_ms_valid", cell.solve_ms_valid},
    });
  }
  nlohmann::json doc = {{"cells", cells}};
  return doc.dump(2) + "\n";
}

// The per-metric tables fold the domains together per (logic, formalizer) pair; the
// breakdown at the end keeps one row per cell.
std::string render_markdown(const MetricsTable& m) {
  std::map<std::pair<int, std::string>, MetricsCell> folded;
  for (const auto& [key, cell] : m.cells) {
    MetricsCell& f = folded[{static_cast<int>(key.logic), key.formalizer}];
    f.cases += cell.cases;
    f.valid += cell.valid;
    f.syntax_errors += cell.syntax_errors;
    f.refinement_total += cell.refinement_total;
    f.solve_ms_valid += cell.solve_ms_valid;
  }

  std::ostringstream out;
  out << "# Evaluation report\n";
  auto metric_table = [&](const char* title, const char* column, auto value) {
    out << "\n## " << title << "\n\n";
    out << "| logic | formalizer | " << column << " |\n";
    out << "|---|---|---|\n";
    for (const auto& [key, cell] : folded) {
      out << "| " << logic_name(static_cast<LogicId>(key.first)) << " | " << key.second
          << " | " << value(cell) << " |\n";
    }
  };
  metric_table("Valid explanations", "valid %",
               [](const MetricsCell& c) { return format2(c.valid_pct()); });
  metric_table("Average refinement iterations", "avg iterations",
               [](const MetricsCell& c) { return format2(c.avg_iterations()); });
  metric_table("Average solving time over valid cases", "avg solve (s)",
               [](const MetricsCell& c) { return format3(c.avg_solve_ms() / 1000.0); });
  metric_table("Syntactic error rate", "syntax err %",
               [](const MetricsCell& c) { return format2(c.syntax_error_pct()); });

  out << "\n## Per-domain breakdown\n\n";
  out << "| logic | formalizer | domain | cases | valid % | avg iterations | avg solve "
         "(s) | syntax err % |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [key, cell] : m.cells) {
    out << "| " << logic_name(key.logic) << " | " << key.formalizer << " | "
        << domain_name(key.domain) << " | " << cell.cases << " | "
        << format2(cell.valid_pct()) << " | " << format2(cell.avg_iterations()) << " | "
        << format3(cell.avg_solve_ms() / 1000.0) << " | "
        << format2(cell.syntax_error_pct()) << " |\n";
  }
  return out.str();
}

}  // namespace

std::string render_report(const MetricsTable& m, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(m);
    case ReportFormat::Json: return render_json(m);
    case ReportFormat::Markdown: return render_markdown(m);
  }
  return "";
}

void write_report(const MetricsTable& m, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << render_report(m, format);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricsTable report_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.contains("cells") || !doc["cells"].is_array())
    throw std::invalid_argument("not a metrics report: expected an object with 'cells'");
  MetricsTable table;
  for (const nlohmann::json& c : doc["cells"]) {
    MetricsKey key;
    if (!c.contains("logic") || !logic_from_name(c["logic"].get<std::string>(), key.logic))
      throw std::invalid_argument("metrics cell with unknown logic");
    if (!c.contains("domain") ||
        !domain_from_name(c["domain"].get<std::string>(), key.domain))
      throw std::invalid_argument("metrics cell with unknown domain");
    key.formalizer = c.value("formalizer", "");
    MetricsCell cell;
    cell.cases = c.value("cases", 0);
    cell.valid = c.value("valid", 0);
    cell.syntax_errors = c.value("syntax_errors", 0);
    cell.refinement_total = c.value("refinement_total", std::int64_t{0});
    cell.solve_ms_valid = c.value("solve_ms_valid", std::int64_t{0});
    table.cells[key] = cell;
  }
  return table;
}

std::string render_case_log(const std::vector<CaseOutcome>& log) {
  std::ostringstream out;
  for (const CaseOutcome& c : log) {
    out << "case=" << c.case_id << " domain=" << domain_name(c.domain)
        << " logic=" << logic_name(c.logic) << " formalizer=" << c.formalizer
        << " status=" << case_status_name(c.status) << " iterations=" << c.iterations_used
        << " solving_ms=" << c.solving_ms;
    if (!c.error_category.empty()) out << " error_category=" << c.error_category;
    out << "\n";
  }
  return out.str();
}

}  // namespace logiparam
