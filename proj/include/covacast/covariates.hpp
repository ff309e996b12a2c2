#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covacast/calendar.hpp"

namespace covacast {

enum class CovariateKind { Year, Month, Date, DayOfWeek, YearWeek };

/// Config names: year, month, date, day_of_week, year_week.
[[nodiscard]] std::string_view to_string(CovariateKind kind) noexcept;
[[nodiscard]] std::optional<CovariateKind> parse_covariate_kind(std::string_view name) noexcept;

/// Table label, e.g. "Day of Week".
[[nodiscard]] std::string_view display_name(CovariateKind kind) noexcept;

/// Year "2024", Month "January", Date "2024-01-15", DayOfWeek "Monday",
/// YearWeek "2024-W01" (ISO-8601 week numbering).
[[nodiscard]] std::string render_covariate(Timestamp t, CovariateKind kind);

/// In-prompt rendering of a censored entry.
inline constexpr std::string_view kCensoredToken = "unknown";

struct CovariateEntry {
  Timestamp timestamp;
  std::optional<std::string> value;  // nullopt = censored

  [[nodiscard]] bool censored() const noexcept { return !value.has_value(); }
  [[nodiscard]] std::string_view text() const noexcept { return value ? std::string_view{*value} : kCensoredToken; }

  bool operator==(const CovariateEntry&) const = default;
};

/// One covariate aligned to a run of timestamps. `name` is the kind's
/// config name for calendar covariates, or the CSV column name for
/// user-supplied ones (then `kind` is empty).
struct CovariateSeries {
  std::string name;
  std::optional<CovariateKind> kind;
  std::vector<CovariateEntry> entries;

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
  [[nodiscard]] std::size_t censored_count() const noexcept;

  /// Entries [begin, end).
  [[nodiscard]] CovariateSeries slice(std::size_t begin, std::size_t end) const;

  bool operator==(const CovariateSeries&) const = default;
};

/// Timestamps must be nonempty and strictly increasing.
[[nodiscard]] CovariateSeries derive_covariate(std::span<const Timestamp> timestamps, CovariateKind kind);

/// Verbatim categorical column.
[[nodiscard]] CovariateSeries covariate_from_column(std::string name, std::span<const Timestamp> timestamps,
                                                    std::vector<std::string> values);

enum class CensorScope { Both, HistoryOnly, HorizonOnly };

[[nodiscard]] std::string_view to_string(CensorScope scope) noexcept;
[[nodiscard]] std::optional<CensorScope> parse_censor_scope(std::string_view name) noexcept;

/// Replaces exactly round(ratio * n) entries, drawn uniformly without
/// replacement, by the censored marker. Deterministic in (cov, ratio, seed).
/// Throws RatioOutOfRange.
[[nodiscard]] CovariateSeries censor_covariates(const CovariateSeries& cov, double ratio, std::uint64_t seed);

/// As above, restricted to the history entries (the first
/// `history_length`), the horizon entries (the rest), or both pooled.
[[nodiscard]] CovariateSeries censor_covariates(const CovariateSeries& cov, double ratio, std::uint64_t seed,
                                                CensorScope scope, std::size_t history_length);

}  // namespace covacast
