#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "covacast/calendar.hpp"

namespace covacast {

struct TimePoint {
  Timestamp timestamp;
  double value;

  bool operator==(const TimePoint&) const = default;
};

/// Ordered, gap-free, finite-valued observations of one target variable.
/// Immutable after construction; the constructor enforces every invariant.
class TimeSeries {
 public:
  TimeSeries(std::vector<TimePoint> points, Frequency frequency);

  [[nodiscard]] std::span<const TimePoint> points() const noexcept { return points_; }
  [[nodiscard]] Frequency frequency() const noexcept { return frequency_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] const TimePoint& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] const TimePoint& front() const { return points_.front(); }
  [[nodiscard]] const TimePoint& back() const { return points_.back(); }

  [[nodiscard]] std::vector<double> values() const;
  [[nodiscard]] std::vector<Timestamp> timestamps() const;

  /// Points [begin, end); the range must be nonempty.
  [[nodiscard]] TimeSeries slice(std::size_t begin, std::size_t end) const;

  /// Index of the first point with timestamp >= t.
  [[nodiscard]] std::size_t lower_bound(Timestamp t) const noexcept;

  bool operator==(const TimeSeries&) const = default;

 private:
  std::vector<TimePoint> points_;
  Frequency frequency_;
};

struct TimeRange {
  Timestamp start;
  Timestamp end;  // inclusive
};

struct SplitSpec {
  TimeRange validation;
  TimeRange test;
};

struct SplitParts {
  std::optional<TimeSeries> training;  // empty when validation starts at the series start
  TimeSeries validation;
  TimeSeries test;
};

/// Throws RangeOutOfBounds when a range leaves the series or selects no
/// point, OverlappingRanges when validation does not strictly precede test.
/// Points strictly between the validation end and the test start belong to
/// no part.
[[nodiscard]] SplitParts split_series(const TimeSeries& series, const SplitSpec& spec);

/// Index span [first, last] of the points inside `range`; same errors as
/// split_series.
struct IndexRange {
  std::size_t first;
  std::size_t last;

  [[nodiscard]] std::size_t size() const noexcept { return last - first + 1; }
};

[[nodiscard]] IndexRange locate_range(const TimeSeries& series, const TimeRange& range);

struct ForecastTask {
  std::size_t index;  // position among the tasks of one evaluation range
  TimeSeries history;
  Timestamp origin;
  std::size_t horizon;
  std::vector<double> truth;
  std::vector<Timestamp> target_timestamps;
};

struct RollingOptions {
  std::size_t stride = 0;                  // 0 means stride = horizon
  std::optional<std::size_t> max_history;  // cap on history length
};

struct RollingPlan {
  std::vector<ForecastTask> tasks;
  std::size_t uncovered_tail = 0;  // range points after the last task's truth
};

/// Rolling-origin tasks over `eval_range`: origins at the range start and
/// then every `stride` points, stopping before any truth window would pass
/// the range end. Throws HorizonTooLarge, RangeOutOfBounds (also when the
/// range starts at the first point, leaving no history).
[[nodiscard]] RollingPlan plan_rolling_origins(const TimeSeries& series, const TimeRange& eval_range,
                                               std::size_t horizon, const RollingOptions& options = {});

[[nodiscard]] std::vector<ForecastTask> rolling_origins(const TimeSeries& series, const TimeRange& eval_range,
                                                        std::size_t horizon, std::size_t stride);

}  // namespace covacast
