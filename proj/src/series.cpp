#include "covacast/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "covacast/error.hpp"

namespace covacast {

TimeSeries::TimeSeries(std::vector<TimePoint> points, Frequency frequency)
    : points_(std::move(points)), frequency_(frequency) {
  if (points_.empty()) throw Error(ErrorCode::EmptyInput, "time series needs at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].value)) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value at " + format_iso(points_[i].timestamp));
    }
    if (i > 0 && !is_next_step(points_[i - 1].timestamp, points_[i].timestamp, frequency_)) {
      throw Error(ErrorCode::FrequencyGap, "expected one " + std::string(to_string(frequency_)) +
                                               " step between " + format_iso(points_[i - 1].timestamp) +
                                               " and " + format_iso(points_[i].timestamp));
    }
  }
}

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.value);
  return out;
}

std::vector<Timestamp> TimeSeries::timestamps() const {
  std::vector<Timestamp> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.timestamp);
  return out;
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > points_.size()) {
    throw Error(ErrorCode::RangeOutOfBounds, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                 ") of a series with " + std::to_string(points_.size()) +
                                                 " points");
  }
  return TimeSeries(std::vector<TimePoint>(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           points_.begin() + static_cast<std::ptrdiff_t>(end)),
                    frequency_);
}

std::size_t TimeSeries::lower_bound(Timestamp t) const noexcept {
  const auto it = std::lower_bound(points_.begin(), points_.end(), t,
                                   [](const TimePoint& p, Timestamp ts) { return p.timestamp < ts; });
  return static_cast<std::size_t>(it - points_.begin());
}

IndexRange locate_range(const TimeSeries& series, const TimeRange& range) {
  const auto describe = [&] { return "[" + format_iso(range.start) + ", " + format_iso(range.end) + "]"; };
  if (range.end < range.start) throw Error(ErrorCode::RangeOutOfBounds, "range " + describe() + " is reversed");
  if (range.start < series.front().timestamp || range.end > series.back().timestamp) {
    throw Error(ErrorCode::RangeOutOfBounds, "range " + describe() + " exceeds the series span [" +
                                                 format_iso(series.front().timestamp) + ", " +
                                                 format_iso(series.back().timestamp) + "]");
  }
  const std::size_t first = series.lower_bound(range.start);
  const std::size_t past = series.lower_bound(range.end + std::chrono::seconds{1});
  if (first >= past) throw Error(ErrorCode::RangeOutOfBounds, "range " + describe() + " selects no point");
  return IndexRange{first, past - 1};
}

SplitParts split_series(const TimeSeries& series, const SplitSpec& spec) {
  if (spec.test.start <= spec.validation.end) {
    throw Error(ErrorCode::OverlappingRanges, "validation range must end before the test range starts");
  }
  const IndexRange val = locate_range(series, spec.validation);
  const IndexRange test = locate_range(series, spec.test);
  std::optional<TimeSeries> training;
  if (val.first > 0) training = series.slice(0, val.first);
  return SplitParts{std::move(training), series.slice(val.first, val.last + 1),
                    series.slice(test.first, test.last + 1)};
}

RollingPlan plan_rolling_origins(const TimeSeries& series, const TimeRange& eval_range, std::size_t horizon,
                                 const RollingOptions& options) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  const IndexRange range = locate_range(series, eval_range);
  if (horizon > range.size()) {
    throw Error(ErrorCode::HorizonTooLarge, "horizon " + std::to_string(horizon) + " exceeds the " +
                                                std::to_string(range.size()) + "-point evaluation range");
  }
  if (range.first == 0) {
    throw Error(ErrorCode::RangeOutOfBounds, "evaluation range starts at the first point; no history");
  }
  if (options.max_history && *options.max_history == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_history must be positive");
  }
  const std::size_t stride = options.stride == 0 ? horizon : options.stride;

  RollingPlan plan;
  std::size_t covered_end = range.first;  // one past the last truth index
  for (std::size_t origin = range.first; origin + horizon - 1 <= range.last; origin += stride) {
    std::size_t history_begin = 0;
    if (options.max_history && origin > *options.max_history) history_begin = origin - *options.max_history;
    ForecastTask task{plan.tasks.size(), series.slice(history_begin, origin), series[origin].timestamp, horizon,
                      {}, {}};
    for (std::size_t k = 0; k < horizon; ++k) {
      task.truth.push_back(series[origin + k].value);
      task.target_timestamps.push_back(series[origin + k].timestamp);
    }
    covered_end = std::max(covered_end, origin + horizon);
    plan.tasks.push_back(std::move(task));
  }
  plan.uncovered_tail = range.last + 1 - covered_end;
  return plan;
}

std::vector<ForecastTask> rolling_origins(const TimeSeries& series, const TimeRange& eval_range,
                                          std::size_t horizon, std::size_t stride) {
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
  return plan_rolling_origins(series, eval_range, horizon, RollingOptions{stride, std::nullopt}).tasks;
}

}  // namespace covacast
