#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "covacast/experiment.hpp"

namespace covacast {

enum class ReportStyle { Markdown, Csv };

[[nodiscard]] std::optional<ReportStyle> parse_report_style(std::string_view name) noexcept;

/// Two decimals, as in the result tables.
[[nodiscard]] std::string format_metric(double value);

/// "≤ 10^-4" below 1e-4, otherwise scientific with two decimals ("2.03E-02").
[[nodiscard]] std::string format_p_value(double p);

struct ReportFile {
  std::string name;  // relative path
  std::string content;
};

struct Report {
  std::string text;
  std::vector<ReportFile> files;  // plot data, plus t-test CSV in csv style
};

/// Tables from the run records and t-test entries of a log: main results
/// (validation and test columns for the splits present), replication
/// summaries, censoring sweeps and p-values. Plot-data CSVs hold
/// timestamp, truth and forecast per main-stage cell. Throws EmptyLog when
/// the log holds no run record.
[[nodiscard]] Report render_report(const std::vector<nlohmann::json>& log, ReportStyle style);

/// One line of the csv-style report.
struct CsvRecordRow {
  CellKey key;
  MetricReport report;
  std::size_t parse_failures = 0;

  bool operator==(const CsvRecordRow&) const = default;
};

/// Reads back the text of a csv-style report. Throws InvalidArgument.
[[nodiscard]] std::vector<CsvRecordRow> parse_report_csv(std::string_view text);

}  // namespace covacast
