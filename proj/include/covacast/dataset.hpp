#pragma once

#include <string_view>
#include <vector>

#include "covacast/config.hpp"
#include "covacast/covariates.hpp"
#include "covacast/series.hpp"

namespace covacast {

struct Dataset {
  TimeSeries series;
  std::vector<CovariateSeries> extra_covariates;  // one per extra column, verbatim text
};

/// Parses CSV text with a header row. Rows are sorted by timestamp;
/// 30-minute data is summed into daily totals when the config asks for it
/// (extra columns then keep each day's first value).
/// Throws MissingColumn, RowError (UnparseableTimestamp, NonNumericValue,
/// InvalidArgument for ragged or duplicate rows), FrequencyGap naming the gap.
[[nodiscard]] Dataset parse_dataset_csv(std::string_view text, const DatasetConfig& config);

/// Reads config.path and parses it. Throws Io when unreadable.
[[nodiscard]] Dataset load_dataset(const DatasetConfig& config);

/// RFC 4180 fields of one record per row; quoted fields may hold commas,
/// doubled quotes and line breaks. Each row keeps its starting line number.
struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};
[[nodiscard]] std::vector<CsvRow> parse_csv(std::string_view text);

}  // namespace covacast
