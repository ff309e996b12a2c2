#include "covacast/covariates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "covacast/error.hpp"
#include "covacast/random.hpp"

namespace covacast {

std::string_view to_string(CovariateKind kind) noexcept {
  switch (kind) {
    case CovariateKind::Year: return "year";
    case CovariateKind::Month: return "month";
    case CovariateKind::Date: return "date";
    case CovariateKind::DayOfWeek: return "day_of_week";
    case CovariateKind::YearWeek: return "year_week";
  }
  return "unknown";
}

std::optional<CovariateKind> parse_covariate_kind(std::string_view name) noexcept {
  for (const auto kind : {CovariateKind::Year, CovariateKind::Month, CovariateKind::Date,
                          CovariateKind::DayOfWeek, CovariateKind::YearWeek}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view display_name(CovariateKind kind) noexcept {
  switch (kind) {
    case CovariateKind::Year: return "Year";
    case CovariateKind::Month: return "Month";
    case CovariateKind::Date: return "Date";
    case CovariateKind::DayOfWeek: return "Day of Week";
    case CovariateKind::YearWeek: return "Year-Week";
  }
  return "Unknown";
}

std::string render_covariate(Timestamp t, CovariateKind kind) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(t)};
  switch (kind) {
    case CovariateKind::Year: return std::to_string(static_cast<int>(ymd.year()));
    case CovariateKind::Month: return std::string(month_name(static_cast<unsigned>(ymd.month())));
    case CovariateKind::Date: return format_date(t);
    case CovariateKind::DayOfWeek: return std::string(weekday_name(iso_weekday(t)));
    case CovariateKind::YearWeek: {
      const IsoWeek w = iso_week(t);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-W%02u", w.year, w.week);
      return buf;
    }
  }
  return {};
}

std::size_t CovariateSeries::censored_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const CovariateEntry& e) { return e.censored(); }));
}

CovariateSeries CovariateSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > entries.size()) {
    throw Error(ErrorCode::RangeOutOfBounds, "covariate slice out of range");
  }
  return CovariateSeries{name, kind,
                         std::vector<CovariateEntry>(entries.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     entries.begin() + static_cast<std::ptrdiff_t>(end))};
}

namespace {

void check_increasing(std::span<const Timestamp> timestamps) {
  if (timestamps.empty()) throw Error(ErrorCode::EmptyInput, "no timestamps to derive covariates from");
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i - 1] < timestamps[i])) {
      throw Error(ErrorCode::InvalidArgument, "covariate timestamps must be strictly increasing");
    }
  }
}

}  // namespace

CovariateSeries derive_covariate(std::span<const Timestamp> timestamps, CovariateKind kind) {
  check_increasing(timestamps);
  CovariateSeries out{std::string(to_string(kind)), kind, {}};
  out.entries.reserve(timestamps.size());
  for (const auto t : timestamps) out.entries.push_back({t, render_covariate(t, kind)});
  return out;
}

CovariateSeries covariate_from_column(std::string name, std::span<const Timestamp> timestamps,
                                      std::vector<std::string> values) {
  check_increasing(timestamps);
  if (values.size() != timestamps.size()) {
    throw Error(ErrorCode::LengthMismatch, "covariate column '" + name + "' does not match its timestamps");
  }
  CovariateSeries out{std::move(name), std::nullopt, {}};
  out.entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.entries.push_back({timestamps[i], std::move(values[i])});
  return out;
}

std::string_view to_string(CensorScope scope) noexcept {
  switch (scope) {
    case CensorScope::Both: return "both";
    case CensorScope::HistoryOnly: return "history_only";
    case CensorScope::HorizonOnly: return "horizon_only";
  }
  return "unknown";
}

std::optional<CensorScope> parse_censor_scope(std::string_view name) noexcept {
  for (const auto scope : {CensorScope::Both, CensorScope::HistoryOnly, CensorScope::HorizonOnly}) {
    if (to_string(scope) == name) return scope;
  }
  return std::nullopt;
}

CovariateSeries censor_covariates(const CovariateSeries& cov, double ratio, std::uint64_t seed) {
  return censor_covariates(cov, ratio, seed, CensorScope::Both, cov.size());
}

CovariateSeries censor_covariates(const CovariateSeries& cov, double ratio, std::uint64_t seed,
                                  CensorScope scope, std::size_t history_length) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::RatioOutOfRange, "censoring ratio " + std::to_string(ratio) + " is outside [0, 1]");
  }
  if (history_length > cov.size()) {
    throw Error(ErrorCode::InvalidArgument, "history length exceeds the covariate series");
  }
  std::size_t begin = 0;
  std::size_t end = cov.size();
  if (scope == CensorScope::HistoryOnly) end = history_length;
  if (scope == CensorScope::HorizonOnly) begin = history_length;

  const std::size_t pool = end - begin;
  const auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pool)));
  CovariateSeries out = cov;
  for (const auto i : sample_without_replacement(pool, count, seed)) out.entries[begin + i].value.reset();
  return out;
}

}  // namespace covacast
