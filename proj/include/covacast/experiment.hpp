#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covacast/covariates.hpp"
#include "covacast/llm.hpp"
#include "covacast/metrics.hpp"
#include "covacast/prompt.hpp"
#include "covacast/series.hpp"
#include "covacast/stats.hpp"

namespace covacast {

enum class Split { Validation, Test };
enum class Stage { Main, Replication, Censoring };
enum class Method { Llm, SeasonalNaive, Autoregressive };

[[nodiscard]] std::string_view to_string(Split split) noexcept;
[[nodiscard]] std::string_view to_string(Stage stage) noexcept;
[[nodiscard]] std::string_view to_string(Method method) noexcept;
[[nodiscard]] std::string_view to_string(Criterion criterion) noexcept;
[[nodiscard]] std::optional<Split> parse_split(std::string_view name) noexcept;
[[nodiscard]] std::optional<Stage> parse_stage(std::string_view name) noexcept;
[[nodiscard]] std::optional<Method> parse_method(std::string_view name) noexcept;
[[nodiscard]] std::optional<Criterion> parse_criterion(std::string_view name) noexcept;

/// Identifies one table cell for one replication. `format` is only
/// meaningful for Method::Llm.
struct CellKey {
  std::string dataset_id;
  std::size_t horizon = 1;
  Method method = Method::Llm;
  PromptFormat format = PromptFormat::NoCovariate;
  std::optional<std::string> covariate;
  Split split = Split::Validation;
  double censoring_level = 0.0;
  std::size_t replication = 0;
  Stage stage = Stage::Main;

  bool operator==(const CellKey&) const = default;
};

/// Report order: dataset, horizon, stage, method, format, covariate,
/// censoring level, split, replication.
[[nodiscard]] bool operator<(const CellKey& a, const CellKey& b);

struct ForecastPoint {
  std::size_t task;
  Timestamp timestamp;
  double truth;
  double forecast;

  bool operator==(const ForecastPoint&) const = default;
};

struct RunRecord {
  CellKey key;
  MetricReport report;
  std::uint64_t seed = 0;
  std::string backend_id;
  std::size_t parse_failures = 0;
  std::chrono::milliseconds wall_time{0};
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t scheduled_points = 0;  // report.n_points + horizon * parse_failures
  std::size_t uncovered_points = 0;  // range tail not reached by any window
  std::vector<ForecastPoint> points;

  /// Equality ignoring wall_time.
  [[nodiscard]] bool same_outcome(const RunRecord& other) const;
};

/// Everything a cell needs to know about its dataset.
struct CellData {
  std::string dataset_id;
  TimeSeries series;
  std::vector<CovariateSeries> covariates;  // each aligned to every series timestamp
  SplitSpec splits;

  [[nodiscard]] const CovariateSeries* find_covariate(std::string_view name) const noexcept;
};

struct EvalOptions {
  RollingOptions rolling;
  CensorScope censor_scope = CensorScope::Both;
  std::optional<std::string> knowledge_text;
  std::optional<double> temperature;  // forwarded to the backend
  std::size_t seasonal_period = 1;
  std::size_t ar_order = 2;
  int ar_differencing = 1;
};

/// Per-task trail kept for the run log.
struct TaskTrace {
  std::size_t task = 0;
  Timestamp origin;
  std::string prompt;
  std::vector<std::string> replies;
  std::optional<std::string> parse_error;  // set when both attempts failed to parse
};

struct CellOutcome {
  RunRecord record;
  std::vector<TaskTrace> traces;
};

/// Renders the prompts of every rolling-origin task of an LLM cell without
/// contacting any backend.
[[nodiscard]] std::vector<TaskTrace> render_cell_prompts(const CellKey& key, const CellData& data,
                                                         const EvalOptions& options, std::uint64_t seed);

/// Builds the rolling-origin tasks of the key's split, censors covariates
/// at the key's level, renders and completes each prompt (one fresh retry
/// when a reply does not parse), pools every parsed point and scores it.
/// Baseline methods forecast locally and ignore `backend`. Throws
/// AllTasksFailed when no reply parses; backend errors propagate.
[[nodiscard]] CellOutcome evaluate_cell(const CellKey& key, const CellData& data, Backend* backend,
                                        const EvalOptions& options, std::uint64_t seed);

struct PromptChoice {
  PromptFormat format;
  std::optional<std::string> covariate;

  bool operator==(const PromptChoice&) const = default;
};

/// Argmin of the criterion over validation records; ties go to the lower
/// MAE, then the format name, then the covariate name. Throws
/// EmptyRecordSet, InvalidArgument for mixed record sets.
[[nodiscard]] PromptChoice select_best(const std::vector<RunRecord>& records, Criterion criterion);

/// n evaluations of one cell differing only in replication index and the
/// seed derived from it.
[[nodiscard]] std::vector<CellOutcome> replicate_cell(const CellKey& key, std::size_t n_replications,
                                                      const CellData& data, Backend* backend,
                                                      const EvalOptions& options, std::uint64_t base_seed);

/// One evaluation per (level, seed); the seed's position becomes the
/// replication index.
[[nodiscard]] std::vector<CellOutcome> censoring_sweep(const CellKey& key_template, const std::vector<double>& levels,
                                                       const std::vector<std::uint64_t>& seeds, const CellData& data,
                                                       Backend* backend, const EvalOptions& options);

struct MetricTests {
  WelchResult rmse;
  WelchResult mae;
  std::optional<WelchResult> mape;  // empty when either side has under two defined MAPEs
};

/// Welch tests per metric between two sets of per-replication reports.
[[nodiscard]] MetricTests compare_reports(const std::vector<MetricReport>& a, const std::vector<MetricReport>& b);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The exception of
/// the lowest failing index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn);

}  // namespace covacast

#include "covacast/detail/parallel.hpp"
