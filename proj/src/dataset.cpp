#include "covacast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "covacast/error.hpp"

namespace covacast {

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRow row{line, {}};
    std::string field;
    bool in_quotes = false;
    bool row_done = false;
    while (i < text.size() && !row_done) {
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        ++i;
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          break;
        case '\r':
          break;
        case '\n':
          row_done = true;
          ++line;
          break;
        default:
          field.push_back(c);
      }
      ++i;
    }
    if (in_quotes) throw RowError(ErrorCode::InvalidArgument, row.line, "unterminated quoted field");
    row.fields.push_back(std::move(field));
    const bool blank = row.fields.size() == 1 && row.fields[0].find_first_not_of(" \t") == std::string::npos;
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double parse_value(const std::string& text, std::size_t line) {
  double v = 0.0;
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw RowError(ErrorCode::NonNumericValue, line, "value '" + text + "' is not a finite decimal number");
  }
  return v;
}

struct Row {
  std::size_t line;
  Timestamp timestamp;
  double value;
  std::vector<std::string> extras;
};

}  // namespace

Dataset parse_dataset_csv(std::string_view text, const DatasetConfig& config) {
  const std::vector<CsvRow> csv = parse_csv(text);
  if (csv.empty()) throw Error(ErrorCode::EmptyInput, "CSV has no header row");
  std::vector<std::string> header;
  for (const auto& f : csv.front().fields) header.push_back(trim(f));

  const std::size_t ts_col = column_index(header, config.timestamp_column);
  const std::size_t value_col = column_index(header, config.value_column);
  std::vector<std::size_t> extra_cols;
  for (const auto& name : config.extra_covariate_columns) extra_cols.push_back(column_index(header, name));

  std::vector<Row> rows;
  for (std::size_t r = 1; r < csv.size(); ++r) {
    const CsvRow& raw = csv[r];
    if (raw.fields.size() != header.size()) {
      throw RowError(ErrorCode::InvalidArgument, raw.line,
                     "expected " + std::to_string(header.size()) + " fields, found " +
                         std::to_string(raw.fields.size()));
    }
    Row row;
    row.line = raw.line;
    const std::string ts = trim(raw.fields[ts_col]);
    try {
      row.timestamp = normalize(parse_timestamp(ts), config.frequency);
    } catch (const Error&) {
      throw RowError(ErrorCode::UnparseableTimestamp, raw.line, "timestamp '" + ts + "' is not ISO-8601");
    }
    row.value = parse_value(trim(raw.fields[value_col]), raw.line);
    for (const auto c : extra_cols) row.extras.push_back(trim(raw.fields[c]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "CSV has no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].timestamp == rows[i - 1].timestamp) {
      throw RowError(ErrorCode::InvalidArgument, rows[i].line,
                     "duplicate timestamp " + format_iso(rows[i].timestamp) + " (also on line " +
                         std::to_string(rows[i - 1].line) + ")");
    }
  }

  Frequency frequency = config.frequency;
  if (frequency == Frequency::HalfHourly && config.aggregate_daily) {
    std::vector<Row> days;
    for (auto& row : rows) {
      const Timestamp day = normalize(row.timestamp, Frequency::Daily);
      if (!days.empty() && days.back().timestamp == day) {
        days.back().value += row.value;
      } else {
        row.timestamp = day;
        days.push_back(std::move(row));
      }
    }
    rows = std::move(days);
    frequency = Frequency::Daily;
  }

  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!is_next_step(rows[i - 1].timestamp, rows[i].timestamp, frequency)) {
      throw Error(ErrorCode::FrequencyGap, "missing " + std::string(to_string(frequency)) + " step after " +
                                               format_for(rows[i - 1].timestamp, frequency) + " (next row is " +
                                               format_for(rows[i].timestamp, frequency) + ", line " +
                                               std::to_string(rows[i].line) + ")");
    }
  }

  std::vector<TimePoint> points;
  points.reserve(rows.size());
  for (const auto& row : rows) points.push_back({row.timestamp, row.value});
  TimeSeries series(std::move(points), frequency);

  Dataset out{std::move(series), {}};
  const auto timestamps = out.series.timestamps();
  for (std::size_t c = 0; c < extra_cols.size(); ++c) {
    std::vector<std::string> values;
    values.reserve(rows.size());
    for (const auto& row : rows) values.push_back(row.extras[c]);
    out.extra_covariates.push_back(
        covariate_from_column(config.extra_covariate_columns[c], timestamps, std::move(values)));
  }
  return out;
}

Dataset load_dataset(const DatasetConfig& config) {
  std::ifstream in(config.path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + config.path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_csv(buffer.str(), config);
}

}  // namespace covacast
