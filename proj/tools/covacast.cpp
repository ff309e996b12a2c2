#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "covacast/config.hpp"
#include "covacast/error.hpp"
#include "covacast/pipeline.hpp"
#include "covacast/report.hpp"
#include "covacast/runlog.hpp"

namespace fs = std::filesystem;
using namespace covacast;

namespace {

bool is_runlog(const fs::path& path) { return path.extension() == ".jsonl"; }

// A config file, or the config snapshot of an earlier run log.
ExperimentConfig config_from_source(const fs::path& source, const std::vector<std::string>& overrides) {
  if (!is_runlog(source)) return load_config(source, overrides);
  nlohmann::json tree = config_snapshot(read_runlog(source));
  for (const auto& o : overrides) apply_override(tree, o);
  return config_from_json(tree);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

void write_report(const Report& report, const fs::path& dir, const std::string& main_name) {
  write_file(dir / main_name, report.text);
  for (const auto& f : report.files) write_file(dir / f.name, f.content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covacast: covariate-aware LLM forecasting experiments"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  fs::path source;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config (or replay a run log's config)");
  run->add_option("config", source, "YAML/JSON config, or a .jsonl run log to replay")->required();
  run->add_option("--set", overrides, "Override a config field: key.path=value (repeatable)");
  std::optional<fs::path> run_log;
  run->add_option("--log", run_log, "Run log path (default <output_dir>/runlog.jsonl)");
  bool dry = false;
  run->add_flag("--dry-run", dry, "Render and log prompts without calling the backend");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto* report = app.add_subcommand("report", "Render tables and plot data from a run log");
  fs::path report_log;
  std::string style = "markdown";
  std::optional<fs::path> report_out;
  report->add_option("runlog", report_log, "JSONL run log")->required()->check(CLI::ExistingFile);
  report->add_option("--style", style, "markdown or csv")->check(CLI::IsMember({"markdown", "csv"}));
  report->add_option("--out", report_out, "Directory for the report and plot files (default: print to stdout)");

  auto* check = app.add_subcommand("validate-config", "Parse and validate a config, print the effective config");
  check->add_option("config", source, "YAML/JSON config")->required()->check(CLI::ExistingFile);
  check->add_option("--set", overrides, "Override a config field: key.path=value (repeatable)");

  auto* prompts = app.add_subcommand("render-prompts", "Print every validation-grid prompt without calling a backend");
  prompts->add_option("config", source, "YAML/JSON config")->required()->check(CLI::ExistingFile);
  prompts->add_option("--set", overrides, "Override a config field: key.path=value (repeatable)");
  prompts->add_flag("--dry-run", dry, "Accepted for symmetry with run; rendering never calls a backend");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config = config_from_source(source, overrides);
      RunOptions options;
      options.dry_run = dry;
      options.progress = quiet ? nullptr : &std::cerr;
      fs::path log_path = run_log.value_or(config.output_dir / "runlog.jsonl");
      if (is_runlog(source) && fs::exists(log_path) && fs::equivalent(log_path, source)) {
        log_path.replace_filename(log_path.stem().string() + "-replay.jsonl");
      }
      options.log_path = log_path;
      const RunSummary summary = run_experiment(config, options);
      if (!dry && !summary.records.empty()) {
        write_report(render_report(summary.log, ReportStyle::Markdown), log_path.parent_path(), "report.md");
      }
      std::cerr << summary.records.size() << " run records, " << summary.cell_failures << " cell failures, "
                << summary.backend_calls << " backend calls; log: " << summary.log_path.string() << "\n";
      return summary.exit_code;
    }
    if (*report) {
      const auto parsed = parse_report_style(style);
      const Report rendered = render_report(read_runlog(report_log), *parsed);
      if (report_out) {
        write_report(rendered, *report_out, *parsed == ReportStyle::Csv ? "report.csv" : "report.md");
      } else {
        std::cout << rendered.text;
      }
      return kExitSuccess;
    }
    if (*check) {
      const ExperimentConfig config = load_config(source, overrides);
      std::cout << config_to_json(config).dump(2) << "\n";
      return kExitSuccess;
    }
    if (*prompts) {
      ExperimentConfig config = load_config(source, overrides);
      RunOptions options;
      options.dry_run = true;
      options.log_path = fs::path{};
      const RunSummary summary = run_experiment(config, options);
      for (const auto& e : summary.log) {
        if (e.value("kind", "") != "prompt") continue;
        const auto& cell = e.at("cell");
        std::cout << "=== h=" << cell.at("horizon") << " " << cell.at("split").get<std::string>() << " "
                  << cell.at("format").get<std::string>()
                  << (cell.at("covariate").is_null() ? "" : "/" + cell.at("covariate").get<std::string>())
                  << " task " << e.at("task") << " origin " << e.at("origin").get<std::string>() << "\n"
                  << e.at("prompt").get<std::string>() << "\n";
      }
      return summary.exit_code;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitSuccess;
}
