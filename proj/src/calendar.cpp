#include "covacast/calendar.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "covacast/error.hpp"

namespace covacast {

namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

constexpr std::array<std::string_view, 7> kWeekdays = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};

// Reads exactly `width` decimal digits at `pos`.
std::optional<int> read_fixed(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::UnparseableTimestamp, "cannot parse timestamp '" + std::string(text) + "'");
}

year_month_day ymd_of(Timestamp t) { return year_month_day{floor<days>(t)}; }

}  // namespace

std::string_view to_string(Frequency frequency) noexcept {
  switch (frequency) {
    case Frequency::Weekly: return "weekly";
    case Frequency::Daily: return "daily";
    case Frequency::HalfHourly: return "30min";
    case Frequency::Monthly: return "monthly";
  }
  return "unknown";
}

std::optional<Frequency> parse_frequency(std::string_view text) noexcept {
  if (text == "weekly") return Frequency::Weekly;
  if (text == "daily") return Frequency::Daily;
  if (text == "30min" || text == "30-minute" || text == "half_hourly") return Frequency::HalfHourly;
  if (text == "monthly") return Frequency::Monthly;
  return std::nullopt;
}

Timestamp parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);

  const auto y = read_fixed(text, 0, 4);
  if (!y || text.size() < 7 || text[4] != '-') bad_timestamp(text);
  const auto m = read_fixed(text, 5, 2);
  if (!m) bad_timestamp(text);
  int d = 1;
  int hh = 0;
  int mm = 0;
  int ss = 0;
  if (text.size() > 7) {
    if (text[7] != '-') bad_timestamp(text);
    const auto day = read_fixed(text, 8, 2);
    if (!day) bad_timestamp(text);
    d = *day;
    if (text.size() > 10) {
      if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':') {
        bad_timestamp(text);
      }
      const auto h = read_fixed(text, 11, 2);
      const auto mi = read_fixed(text, 14, 2);
      if (!h || !mi) bad_timestamp(text);
      hh = *h;
      mm = *mi;
      if (text.size() > 16) {
        if (text.size() != 19 || text[16] != ':') bad_timestamp(text);
        const auto s = read_fixed(text, 17, 2);
        if (!s) bad_timestamp(text);
        ss = *s;
      }
    }
  }
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) bad_timestamp(text);
  return Timestamp{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss};
}

Timestamp normalize(Timestamp t, Frequency frequency) noexcept {
  if (frequency == Frequency::HalfHourly) return t;
  return Timestamp{floor<days>(t)};
}

bool is_next_step(Timestamp prev, Timestamp next, Frequency frequency) noexcept {
  switch (frequency) {
    case Frequency::Weekly: return next - prev == days{7};
    case Frequency::Daily: return next - prev == days{1};
    case Frequency::HalfHourly: return next - prev == minutes{30};
    case Frequency::Monthly: {
      const auto a = ymd_of(prev);
      const auto b = ymd_of(next);
      return year_month{a.year(), a.month()} + months{1} == year_month{b.year(), b.month()};
    }
  }
  return false;
}

Timestamp advance(Timestamp t, Frequency frequency, int steps) noexcept {
  switch (frequency) {
    case Frequency::Weekly: return t + days{7 * steps};
    case Frequency::Daily: return t + days{steps};
    case Frequency::HalfHourly: return t + minutes{30 * steps};
    case Frequency::Monthly: {
      const auto day_start = floor<days>(t);
      const auto time_of_day = t - day_start;
      const year_month_day ymd{day_start};
      const year_month target = year_month{ymd.year(), ymd.month()} + months{steps};
      const auto last = year_month_day_last{target.year(), month_day_last{target.month()}}.day();
      const auto d = ymd.day() > last ? last : ymd.day();
      return Timestamp{sys_days{target / d}} + time_of_day;
    }
  }
  return t;
}

std::string format_date(Timestamp t) {
  const auto ymd = ymd_of(t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_date_time(Timestamp t) {
  const auto day_start = floor<days>(t);
  const hh_mm_ss tod{t - day_start};
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()));
  return format_date(t) + " " + buf;
}

std::string format_iso(Timestamp t) {
  const auto day_start = floor<days>(t);
  const hh_mm_ss tod{t - day_start};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()), static_cast<int>(tod.seconds().count()));
  return format_date(t) + buf;
}

std::string format_for(Timestamp t, Frequency frequency) {
  return frequency == Frequency::HalfHourly ? format_date_time(t) : format_date(t);
}

unsigned iso_weekday(Timestamp t) noexcept {
  return weekday{floor<days>(t)}.iso_encoding();
}

IsoWeek iso_week(Timestamp t) noexcept {
  // The ISO year of a date is the calendar year of the Thursday in its week.
  const sys_days day = floor<days>(t);
  const int offset = 4 - static_cast<int>(iso_weekday(t));
  const sys_days thursday = day + days{offset};
  const year iso_year = year_month_day{thursday}.year();
  const auto ordinal = (thursday - sys_days{iso_year / January / 1}).count();
  return IsoWeek{static_cast<int>(iso_year), static_cast<unsigned>(ordinal / 7 + 1)};
}

std::string_view month_name(unsigned month) noexcept {
  return month >= 1 && month <= 12 ? kMonths[month - 1] : std::string_view{};
}

std::string_view weekday_name(unsigned iso_day) noexcept {
  return iso_day >= 1 && iso_day <= 7 ? kWeekdays[iso_day - 1] : std::string_view{};
}

}  // namespace covacast
