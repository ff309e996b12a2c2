#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "covacast/calendar.hpp"
#include "covacast/covariates.hpp"
#include "covacast/experiment.hpp"
#include "covacast/random.hpp"
#include "covacast/series.hpp"

namespace testsupport {

using namespace covacast;

inline TimeSeries series_from(const std::string& start, Frequency freq, const std::vector<double>& values) {
  std::vector<TimePoint> points;
  Timestamp t = parse_timestamp(start);
  for (const double v : values) {
    points.push_back({t, v});
    t = advance(t, freq);
  }
  return TimeSeries(std::move(points), freq);
}

inline TimeSeries daily(const std::string& start, const std::vector<double>& values) {
  return series_from(start, Frequency::Daily, values);
}

/// Task with the first `history` points as history and the next H as truth.
inline ForecastTask task_from(const TimeSeries& s, std::size_t history, std::size_t horizon, std::size_t index = 0) {
  ForecastTask t{index, s.slice(0, history), s[history].timestamp, horizon, {}, {}};
  for (std::size_t k = 0; k < horizon; ++k) {
    t.truth.push_back(s[history + k].value);
    t.target_timestamps.push_back(s[history + k].timestamp);
  }
  return t;
}

/// Covariate for the history and horizon of a task built by task_from.
inline CovariateSeries task_covariate(const TimeSeries& s, std::size_t history, std::size_t horizon,
                                      CovariateKind kind) {
  const auto ts = s.slice(0, history + horizon).timestamps();
  return derive_covariate(ts, kind);
}

/// Mon..Sun levels repeated from 2024-01-01 (a Monday).
inline const std::vector<double>& weekday_pattern() {
  static const std::vector<double> p{120, 135, 140, 138, 150, 80, 60};
  return p;
}

inline TimeSeries weekday_series(std::size_t days, double noise_sd = 0.0, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::vector<double> values;
  for (std::size_t i = 0; i < days; ++i) {
    double v = weekday_pattern()[i % 7];
    if (noise_sd > 0.0) v += noise_sd * standard_normal(rng);
    values.push_back(v);
  }
  return daily("2024-01-01", values);
}

/// 210 days, validation 2024-05-06..2024-06-09, test 2024-06-10..2024-07-14.
inline CellData weekday_cell_data(double noise_sd = 0.0, std::uint64_t seed = 0) {
  TimeSeries s = weekday_series(210, noise_sd, seed);
  const auto ts = s.timestamps();
  std::vector<CovariateSeries> covs{derive_covariate(ts, CovariateKind::DayOfWeek),
                                    derive_covariate(ts, CovariateKind::Date)};
  covs[0].name = "day_of_week";
  covs[1].name = "date";
  SplitSpec splits{{parse_timestamp("2024-05-06"), parse_timestamp("2024-06-09")},
                   {parse_timestamp("2024-06-10"), parse_timestamp("2024-07-14")}};
  return CellData{"synthetic", std::move(s), std::move(covs), splits};
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool rel_close(double a, double b, double rel) {
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= rel * scale;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("covacast_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
