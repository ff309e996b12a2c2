#include <doctest.h>

#include <random>

#include "covacast/error.hpp"
#include "covacast/report.hpp"
#include "covacast/runlog.hpp"
#include "support.hpp"

using namespace covacast;
using nlohmann::json;

namespace {

RunRecord record(Split split, PromptFormat f, std::optional<std::string> cov, double rmse, double mae,
                 std::optional<double> mape, std::size_t h = 7) {
  RunRecord r;
  r.key.dataset_id = "call_center";
  r.key.horizon = h;
  r.key.format = f;
  r.key.covariate = std::move(cov);
  r.key.split = split;
  r.report = {rmse, mae, mape, 35, 0};
  r.backend_id = "fixture";
  r.scheduled_points = 35;
  return r;
}

std::vector<json> log_of(const std::vector<RunRecord>& records, const std::vector<std::pair<std::string, json>>& extra = {}) {
  RunLog log(1);
  log.append("config", {{"config", json::object()}});
  for (const auto& r : records) log.append("run_record", {{"record", to_json(r)}});
  for (const auto& [kind, payload] : extra) log.append(kind, payload);
  return log.entries();
}

json welch_json(double p) { return to_json(WelchResult{1.0, 4.0, p, false}); }

}  // namespace

TEST_CASE("test-only record renders the best-cell row") {
  const auto log = log_of({record(Split::Test, PromptFormat::Coupled, "day_of_week", 86.56, 51.64, 12.93)});
  const Report r = render_report(log, ReportStyle::Markdown);
  CHECK(r.text.find("| Coupled | Day of Week | 86.56 | 51.64 | 12.93 |") != std::string::npos);
  CHECK(r.text.find("Day of Week | 86.56 | 51.64 | 12.93") != std::string::npos);
  CHECK(r.text.find("Test RMSE") != std::string::npos);
  CHECK(r.text.find("Validation RMSE") == std::string::npos);
}

TEST_CASE("validation and test share one row per key") {
  auto log = log_of(
      {record(Split::Validation, PromptFormat::Coupled, "day_of_week", 109.65, 72.24, 15.40),
       record(Split::Test, PromptFormat::Coupled, "day_of_week", 86.56, 51.64, 12.93),
       record(Split::Validation, PromptFormat::NoCovariate, std::nullopt, 200.0, 150.0, std::nullopt)},
      {{"selection",
        {{"dataset", "call_center"},
         {"horizon", 7},
         {"criterion", "rmse"},
         {"candidates", 2},
         {"choice", {{"format", "coupled"}, {"covariate", "day_of_week"}}}}}});
  const std::string text = render_report(log, ReportStyle::Markdown).text;
  CHECK(text.find("## call_center, horizon 7") != std::string::npos);
  CHECK(text.find("| Coupled | Day of Week | 109.65 | 72.24 | 15.40 | 86.56 | 51.64 | 12.93 |") != std::string::npos);
  CHECK(text.find("| No-Covariate | - | 200.00 | 150.00 | n/a | - | - | - |") != std::string::npos);
  CHECK(text.find("Selected on validation (rmse): Coupled / Day of Week") != std::string::npos);
  // No-covariate row sorts first (format order).
  CHECK(text.find("No-Covariate") < text.find("| Coupled"));
}

TEST_CASE("p-value rendering") {
  CHECK(format_p_value(5e-5) == "≤ 10^-4");
  CHECK(format_p_value(0.0) == "≤ 10^-4");
  CHECK(format_p_value(0.0203) == "2.03E-02");
  CHECK(format_p_value(1e-4) == "1.00E-04");
  CHECK(format_p_value(1.0) == "1.00E+00");
  CHECK(format_metric(86.555) == "86.56");
  CHECK(format_metric(0.0) == "0.00");

  const json t = {{"dataset", "call_center"},
                  {"horizon", 7},
                  {"split", "test"},
                  {"best", {{"format", "coupled"}, {"covariate", "day_of_week"}}},
                  {"other", {{"format", "no_covariate"}, {"covariate", nullptr}}},
                  {"n_best", 50},
                  {"n_other", 50},
                  {"rmse", welch_json(1e-7)},
                  {"mae", welch_json(0.0203)},
                  {"mape", nullptr}};
  const auto log = log_of({record(Split::Test, PromptFormat::Coupled, "day_of_week", 1, 1, 1)}, {{"t_test", t}});
  const std::string text = render_report(log, ReportStyle::Markdown).text;
  CHECK(text.find("### Pairwise Welch t-tests against Coupled / Day of Week") != std::string::npos);
  CHECK(text.find("| No-Covariate | ≤ 10^-4 | 2.03E-02 | n/a |") != std::string::npos);

  const Report csv = render_report(log, ReportStyle::Csv);
  REQUIRE(csv.files.size() == 1);
  CHECK(csv.files[0].name == "t_tests.csv");
  CHECK(csv.files[0].content.find("call_center,7,test,coupled,day_of_week,no_covariate,,50,50,1,4,1e-07,0.0203,") !=
        std::string::npos);
}

TEST_CASE("replication and censoring tables") {
  std::vector<RunRecord> recs;
  for (std::size_t r = 0; r < 3; ++r) {
    RunRecord rec = record(Split::Test, PromptFormat::Coupled, "day_of_week", 1.0 + r, 2.0, 3.0);
    rec.key.stage = Stage::Replication;
    rec.key.replication = r;
    recs.push_back(rec);
  }
  for (const double level : {0.1, 0.5}) {
    for (std::size_t s = 0; s < 2; ++s) {
      RunRecord rec = record(Split::Test, PromptFormat::Coupled, "day_of_week", 10.0 * level + s, 1.0, 1.0);
      rec.key.stage = Stage::Censoring;
      rec.key.censoring_level = level;
      rec.key.replication = s;
      recs.push_back(rec);
    }
  }
  const std::string text = render_report(log_of(recs), ReportStyle::Markdown).text;
  CHECK(text.find("| Coupled | Day of Week | test | 3 | 2.00 | 1.00 | 2.00 | 0.00 | 3.00 | 0.00 |") !=
        std::string::npos);
  CHECK(text.find("### Censoring, Coupled / Day of Week (test)") != std::string::npos);
  CHECK(text.find("| 0.1 | 2 | 1.50 | 1.00 | 1.00 |") != std::string::npos);
  CHECK(text.find("| 0.5 | 2 | 5.50 | 1.00 | 1.00 |") != std::string::npos);
}

TEST_CASE("empty log") {
  CHECK_THROWS_AS((void)render_report({}, ReportStyle::Markdown), Error);
  try {
    (void)render_report(log_of({}), ReportStyle::Csv);
    FAIL("expected EmptyLog");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLog);
  }
}

TEST_CASE("property: csv render then parse keeps every number") {
  std::mt19937_64 rng(5150);
  const std::vector<PromptFormat> formats{PromptFormat::NoCovariate, PromptFormat::Coupled, PromptFormat::Decoupled,
                                          PromptFormat::PromptCast};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RunRecord> recs;
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      RunRecord r = record(rng() % 2 ? Split::Test : Split::Validation, formats[rng() % formats.size()],
                           rng() % 2 ? std::optional<std::string>("has,comma \"q\"") : std::nullopt,
                           uniform_unit(rng) * 1e3, uniform_unit(rng) * 1e-3,
                           rng() % 3 ? std::optional<double>(uniform_unit(rng) * 100.0) : std::nullopt, 1 + i);
      r.key.method = static_cast<Method>(rng() % 3);
      r.key.stage = static_cast<Stage>(rng() % 3);
      r.key.censoring_level = static_cast<double>(rng() % 11) / 10.0;
      r.key.replication = rng() % 5;
      r.report.n_skipped_zero_truth = rng() % 3;
      r.parse_failures = rng() % 4;
      recs.push_back(r);
    }
    const auto log = log_of(recs);
    const std::vector<CsvRecordRow> rows = parse_report_csv(render_report(log, ReportStyle::Csv).text);

    std::vector<RunRecord> sorted = records_in(log);
    std::sort(sorted.begin(), sorted.end(), [](const RunRecord& a, const RunRecord& b) { return a.key < b.key; });
    REQUIRE(rows.size() == sorted.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i] == CsvRecordRow{sorted[i].key, sorted[i].report, sorted[i].parse_failures});
    }
  }
  CHECK_THROWS_AS((void)parse_report_csv("a,b\n1,2\n"), Error);
}

TEST_CASE("plot data files") {
  RunRecord r = record(Split::Test, PromptFormat::Coupled, "day_of_week", 1, 1, 1);
  r.points = {{0, parse_timestamp("2024-06-10"), 120, 118.5}, {0, parse_timestamp("2024-06-11"), 135, 140}};
  RunRecord rep = r;
  rep.key.stage = Stage::Replication;
  rep.key.replication = 3;
  const Report report = render_report(log_of({r, rep}), ReportStyle::Markdown);
  REQUIRE(report.files.size() == 1);
  CHECK(report.files[0].name == "plots/call_center_h7_test_coupled_day_of_week.csv");
  CHECK(report.files[0].content ==
        "task,timestamp,truth,forecast\n0,2024-06-10T00:00:00Z,120,118.5\n0,2024-06-11T00:00:00Z,135,140\n");
}

TEST_CASE("run records survive the JSON log") {
  RunRecord r = record(Split::Validation, PromptFormat::Decoupled, "month", 1.25, 0.5, std::nullopt);
  r.seed = 0xfedcba9876543210ULL;
  r.points = {{2, parse_timestamp("1958-03"), 362, 360.25}};
  r.wall_time = std::chrono::milliseconds{17};
  const RunRecord back = run_record_from_json(json::parse(to_json(r).dump()));
  CHECK(back.same_outcome(r));
  CHECK(back.wall_time == r.wall_time);

  const auto dir = testsupport::scratch_dir("runlog");
  {
    RunLog log(9, dir / "log.jsonl");
    CHECK_THROWS_AS(log.append("run_record", {{"record", to_json(r)}}), Error);
    log.append("config", {{"config", {{"seed", 9}}}});
    log.append("run_record", {{"record", to_json(r)}});
  }
  const auto entries = read_runlog(dir / "log.jsonl");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0]["seq"] == 0);
  CHECK(entries[1]["seq"] == 1);
  CHECK(entries[1]["seed"] == 9);
  CHECK(config_snapshot(entries)["seed"] == 9);
  CHECK(records_in(entries).at(0).same_outcome(r));
  CHECK_THROWS_AS((void)config_snapshot({}), Error);
}
