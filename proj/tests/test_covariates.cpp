#include <doctest.h>

#include <random>
#include <set>

#include "covacast/error.hpp"
#include "support.hpp"

using namespace covacast;
using namespace std::chrono;

TEST_CASE("calendar renderings") {
  const Timestamp t = parse_timestamp("2024-01-01");
  CHECK(render_covariate(t, CovariateKind::YearWeek) == "2024-W01");
  CHECK(render_covariate(t, CovariateKind::DayOfWeek) == "Monday");
  CHECK(render_covariate(t, CovariateKind::Year) == "2024");
  CHECK(render_covariate(t, CovariateKind::Month) == "January");
  CHECK(render_covariate(parse_timestamp("2024-01-15"), CovariateKind::Date) == "2024-01-15");
  CHECK(render_covariate(parse_timestamp("2021-01-03"), CovariateKind::YearWeek) == "2020-W53");
  CHECK(render_covariate(parse_timestamp("2024-03-04"), CovariateKind::YearWeek) == "2024-W10");
}

TEST_CASE("config names round-trip") {
  for (const auto k : {CovariateKind::Year, CovariateKind::Month, CovariateKind::Date, CovariateKind::DayOfWeek,
                       CovariateKind::YearWeek}) {
    CHECK(parse_covariate_kind(to_string(k)) == k);
  }
  CHECK(to_string(CovariateKind::DayOfWeek) == "day_of_week");
  CHECK(display_name(CovariateKind::YearWeek) == "Year-Week");
  CHECK_FALSE(parse_covariate_kind("weekday").has_value());
}

TEST_CASE("property: rendered text parses back to the calendar component") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const sys_days d = sys_days{year{1950} / 1 / 1} + days{static_cast<int>(rng() % 40000)};
    const Timestamp t = d;
    const year_month_day ymd{d};

    CHECK(std::stoi(render_covariate(t, CovariateKind::Year)) == static_cast<int>(ymd.year()));
    CHECK(parse_timestamp(render_covariate(t, CovariateKind::Date)) == t);

    const std::string m = render_covariate(t, CovariateKind::Month);
    unsigned month_index = 0;
    for (unsigned k = 1; k <= 12; ++k) {
      if (month_name(k) == m) month_index = k;
    }
    CHECK(month_index == static_cast<unsigned>(ymd.month()));

    const std::string wd = render_covariate(t, CovariateKind::DayOfWeek);
    unsigned wd_index = 0;
    for (unsigned k = 1; k <= 7; ++k) {
      if (weekday_name(k) == wd) wd_index = k;
    }
    CHECK(wd_index == weekday{d}.iso_encoding());

    // "YYYY-Www": the Monday of that ISO week is within 6 days before t.
    const std::string yw = render_covariate(t, CovariateKind::YearWeek);
    REQUIRE(yw.size() == 8);
    CHECK(yw[4] == '-');
    CHECK(yw[5] == 'W');
    const int iso_year = std::stoi(yw.substr(0, 4));
    const int week = std::stoi(yw.substr(6));
    const sys_days jan4 = sys_days{year{iso_year} / 1 / 4};
    const sys_days week1_monday = jan4 - days{(weekday{jan4}.iso_encoding() - 1)};
    const sys_days monday = week1_monday + days{7 * (week - 1)};
    CHECK(d >= monday);
    CHECK(d < monday + days{7});
  }
}

TEST_CASE("derive_covariate: one entry per timestamp, pure") {
  const auto s = testsupport::daily("2024-01-01", {1, 2, 3, 4, 5, 6, 7, 8});
  const auto ts = s.timestamps();
  const CovariateSeries a = derive_covariate(ts, CovariateKind::DayOfWeek);
  const CovariateSeries b = derive_covariate(ts, CovariateKind::DayOfWeek);
  CHECK(a == b);
  REQUIRE(a.size() == 8);
  CHECK(a.entries[0].text() == "Monday");
  CHECK(a.entries[7].text() == "Monday");
  CHECK(a.name == "day_of_week");
  CHECK_THROWS_AS((void)derive_covariate(std::vector<Timestamp>{}, CovariateKind::Year), Error);
}

namespace {

CovariateSeries ten_dates() {
  std::vector<double> v(10, 1.0);
  return derive_covariate(testsupport::daily("2024-01-01", v).timestamps(), CovariateKind::Date);
}

}  // namespace

TEST_CASE("censor_covariates worked examples") {
  const CovariateSeries cov = ten_dates();
  CHECK(censor_covariates(cov, 0.0, 1) == cov);
  const CovariateSeries all = censor_covariates(cov, 1.0, 1);
  CHECK(all.censored_count() == 10);
  for (const auto& e : all.entries) CHECK(e.text() == "unknown");

  const CovariateSeries three = censor_covariates(cov, 0.3, 42);
  CHECK(three.censored_count() == 3);
  CHECK(censor_covariates(cov, 0.3, 42) == three);

  CHECK_THROWS_AS((void)censor_covariates(cov, -0.1, 1), Error);
  CHECK_THROWS_AS((void)censor_covariates(cov, 1.5, 1), Error);
}

TEST_CASE("censor scope restricts the pool") {
  const CovariateSeries cov = ten_dates();
  const CovariateSeries hist = censor_covariates(cov, 1.0, 3, CensorScope::HistoryOnly, 7);
  for (std::size_t i = 0; i < 10; ++i) CHECK(hist.entries[i].censored() == (i < 7));
  const CovariateSeries hor = censor_covariates(cov, 0.5, 3, CensorScope::HorizonOnly, 6);
  CHECK(hor.censored_count() == 2);
  for (std::size_t i = 0; i < 6; ++i) CHECK_FALSE(hor.entries[i].censored());
}

TEST_CASE("property: censoring keeps length, order and unselected values; exact count") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<double> v(n, 0.0);
    const CovariateSeries cov =
        derive_covariate(testsupport::daily("2023-06-01", v).timestamps(), CovariateKind::DayOfWeek);
    const double ratio = static_cast<double>(rng() % 1001) / 1000.0;
    const CovariateSeries out = censor_covariates(cov, ratio, rng());
    REQUIRE(out.size() == n);
    CHECK(out.censored_count() == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out.entries[i].timestamp == cov.entries[i].timestamp);
      if (!out.entries[i].censored()) CHECK(out.entries[i].value == cov.entries[i].value);
    }
  }
}

TEST_CASE("different seeds give different masks (flagged, not asserted per pair)") {
  std::vector<double> v(40, 0.0);
  const CovariateSeries cov = derive_covariate(testsupport::daily("2024-01-01", v).timestamps(), CovariateKind::Date);
  std::size_t identical = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    if (censor_covariates(cov, 0.5, seed) == censor_covariates(cov, 0.5, seed + 1000)) ++identical;
  }
  if (identical > 0) MESSAGE(identical << " of 50 seed pairs produced the same mask");
  CHECK(identical <= 1);
}
