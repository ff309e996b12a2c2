#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace covacast {

/// UTC instant at second resolution.
using Timestamp = std::chrono::sys_seconds;

enum class Frequency { Weekly, Daily, HalfHourly, Monthly };

[[nodiscard]] std::string_view to_string(Frequency frequency) noexcept;

/// Accepts "weekly", "daily", "30min" / "30-minute" / "half_hourly", "monthly".
[[nodiscard]] std::optional<Frequency> parse_frequency(std::string_view text) noexcept;

/// ISO-8601 subset: "YYYY-MM", "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS][Z]"
/// (a space may replace the 'T'). Throws Error(UnparseableTimestamp).
[[nodiscard]] Timestamp parse_timestamp(std::string_view text);

/// Truncates to UTC midnight for daily, weekly and monthly cadences.
[[nodiscard]] Timestamp normalize(Timestamp t, Frequency frequency) noexcept;

/// True iff `next` is exactly one sampling step after `prev`. Monthly
/// steps compare calendar months only.
[[nodiscard]] bool is_next_step(Timestamp prev, Timestamp next, Frequency frequency) noexcept;

/// One sampling step forward; monthly steps clamp the day to the month end.
[[nodiscard]] Timestamp advance(Timestamp t, Frequency frequency, int steps = 1) noexcept;

[[nodiscard]] std::string format_date(Timestamp t);                        // 2024-01-15
[[nodiscard]] std::string format_date_time(Timestamp t);                   // 2024-01-15 08:30
[[nodiscard]] std::string format_iso(Timestamp t);                         // 2024-01-15T08:30:00Z
[[nodiscard]] std::string format_for(Timestamp t, Frequency frequency);    // date, or date-time if sub-daily

struct IsoWeek {
  int year;
  unsigned week;
};

[[nodiscard]] IsoWeek iso_week(Timestamp t) noexcept;

/// Monday = 1 ... Sunday = 7.
[[nodiscard]] unsigned iso_weekday(Timestamp t) noexcept;

[[nodiscard]] std::string_view month_name(unsigned month) noexcept;      // 1-based
[[nodiscard]] std::string_view weekday_name(unsigned iso_day) noexcept;  // Monday = 1

}  // namespace covacast
