#include "covacast/experiment.hpp"

#include <algorithm>
#include <tuple>

#include "covacast/baselines.hpp"
#include "covacast/error.hpp"
#include "covacast/random.hpp"
#include "covacast/response_parser.hpp"

namespace covacast {

std::string_view to_string(Split split) noexcept {
  return split == Split::Validation ? "validation" : "test";
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Main: return "main";
    case Stage::Replication: return "replication";
    case Stage::Censoring: return "censoring";
  }
  return "unknown";
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Llm: return "llm";
    case Method::SeasonalNaive: return "seasonal_naive";
    case Method::Autoregressive: return "arima";
  }
  return "unknown";
}

std::string_view to_string(Criterion criterion) noexcept {
  switch (criterion) {
    case Criterion::Rmse: return "rmse";
    case Criterion::Mae: return "mae";
    case Criterion::Mape: return "mape";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
  if (name == "validation") return Split::Validation;
  if (name == "test") return Split::Test;
  return std::nullopt;
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
  for (const auto s : {Stage::Main, Stage::Replication, Stage::Censoring}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (const auto m : {Method::Llm, Method::SeasonalNaive, Method::Autoregressive}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::optional<Criterion> parse_criterion(std::string_view name) noexcept {
  for (const auto c : {Criterion::Rmse, Criterion::Mae, Criterion::Mape}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool operator<(const CellKey& a, const CellKey& b) {
  const auto tie = [](const CellKey& k) {
    return std::make_tuple(std::cref(k.dataset_id), k.horizon, k.stage, k.method, k.format, std::cref(k.covariate),
                           k.censoring_level, k.split, k.replication);
  };
  return tie(a) < tie(b);
}

bool RunRecord::same_outcome(const RunRecord& other) const {
  return key == other.key && report == other.report && seed == other.seed && backend_id == other.backend_id &&
         parse_failures == other.parse_failures && prompt_tokens == other.prompt_tokens &&
         completion_tokens == other.completion_tokens && scheduled_points == other.scheduled_points &&
         uncovered_points == other.uncovered_points && points == other.points;
}

const CovariateSeries* CellData::find_covariate(std::string_view name) const noexcept {
  for (const auto& c : covariates) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

const TimeRange& range_for(const CellData& data, Split split) {
  return split == Split::Validation ? data.splits.validation : data.splits.test;
}

PromptSpec prompt_spec_for(const CellKey& key, const EvalOptions& options) {
  PromptSpec spec{key.format, key.covariate, std::nullopt};
  if (key.format == PromptFormat::KnowledgeGuided) spec.knowledge_text = options.knowledge_text;
  return spec;
}

const CovariateSeries* covariate_for(const CellKey& key, const CellData& data) {
  if (!key.covariate) return nullptr;
  const CovariateSeries* cov = data.find_covariate(*key.covariate);
  if (cov == nullptr) throw Error(ErrorCode::MissingCovariates, "no covariate named '" + *key.covariate + "'");
  if (cov->size() != data.series.size()) {
    throw Error(ErrorCode::CovariateMisaligned, "covariate '" + cov->name + "' does not cover the series");
  }
  return cov;
}

// Covariate entries for the task's history and horizon, censored at the
// key's level.
std::optional<CovariateSeries> task_covariates(const CellKey& key, const CellData& data, const ForecastTask& task,
                                               const CovariateSeries* full, const EvalOptions& options,
                                               std::uint64_t seed) {
  if (full == nullptr) return std::nullopt;
  const std::size_t begin = data.series.lower_bound(task.history.front().timestamp);
  const std::size_t end = begin + task.history.size() + task.horizon;
  CovariateSeries cov = full->slice(begin, end);
  if (key.censoring_level > 0.0) {
    cov = censor_covariates(cov, key.censoring_level, derive_seed(seed, {task.index, 0x63656e73ULL}),
                            options.censor_scope, task.history.size());
  }
  return cov;
}

bool is_parse_error(const Error& e) {
  return e.code() == ErrorCode::NoNumbersFound || e.code() == ErrorCode::CountMismatch ||
         e.code() == ErrorCode::NonFiniteToken;
}

std::vector<double> baseline_forecast(Method method, const ForecastTask& task, const EvalOptions& options) {
  const auto history = task.history.values();
  if (method == Method::SeasonalNaive) return seasonal_naive_forecast(history, options.seasonal_period, task.horizon);
  const ARModel model = fit_ar(history, options.ar_order, options.ar_differencing);
  return ar_forecast(model, history, task.horizon);
}

}  // namespace

std::vector<TaskTrace> render_cell_prompts(const CellKey& key, const CellData& data, const EvalOptions& options,
                                           std::uint64_t seed) {
  if (key.method != Method::Llm) throw Error(ErrorCode::InvalidArgument, "only LLM cells have prompts");
  const RollingPlan plan = plan_rolling_origins(data.series, range_for(data, key.split), key.horizon, options.rolling);
  const CovariateSeries* full = covariate_for(key, data);
  const PromptSpec spec = prompt_spec_for(key, options);
  std::vector<TaskTrace> traces;
  for (const auto& task : plan.tasks) {
    const auto cov = task_covariates(key, data, task, full, options, seed);
    traces.push_back(TaskTrace{task.index, task.origin, render_prompt(spec, task, cov ? &*cov : nullptr).text, {},
                               std::nullopt});
  }
  return traces;
}

CellOutcome evaluate_cell(const CellKey& key, const CellData& data, Backend* backend, const EvalOptions& options,
                          std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  const RollingPlan plan = plan_rolling_origins(data.series, range_for(data, key.split), key.horizon, options.rolling);
  const std::size_t n_tasks = plan.tasks.size();

  struct TaskResult {
    std::optional<std::vector<double>> forecast;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
  };
  std::vector<TaskResult> results(n_tasks);
  std::vector<TaskTrace> traces(n_tasks);

  if (key.method == Method::Llm) {
    if (backend == nullptr) throw Error(ErrorCode::BackendUnavailable, "LLM cell without a backend");
    const CovariateSeries* full = covariate_for(key, data);
    const PromptSpec spec = prompt_spec_for(key, options);
    parallel_for(n_tasks, backend->parallelism(), [&](std::size_t i) {
      const ForecastTask& task = plan.tasks[i];
      const auto cov = task_covariates(key, data, task, full, options, seed);
      const PromptText prompt = render_prompt(spec, task, cov ? &*cov : nullptr);
      TaskTrace& trace = traces[i];
      trace.task = task.index;
      trace.origin = task.origin;
      trace.prompt = prompt.text;
      // A reply that fails to parse gets one fresh completion.
      for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
        RequestContext context{derive_seed(seed, {task.index, attempt + 1}), options.temperature};
        CompletionResult reply = backend->complete(prompt, context);
        results[i].prompt_tokens += reply.prompt_tokens;
        results[i].completion_tokens += reply.completion_tokens;
        trace.replies.push_back(reply.text);
        try {
          results[i].forecast = parse_forecast(reply.text, task.horizon).values;
          trace.parse_error.reset();
          break;
        } catch (const Error& e) {
          if (!is_parse_error(e)) throw;
          trace.parse_error = e.what();
        }
      }
    });
  } else {
    for (std::size_t i = 0; i < n_tasks; ++i) {
      traces[i].task = plan.tasks[i].index;
      traces[i].origin = plan.tasks[i].origin;
      results[i].forecast = baseline_forecast(key.method, plan.tasks[i], options);
    }
  }

  RunRecord record;
  record.key = key;
  record.seed = seed;
  record.backend_id = key.method == Method::Llm ? backend->id() : std::string(to_string(key.method));
  record.uncovered_points = plan.uncovered_tail;
  std::vector<double> predictions;
  std::vector<double> truths;
  for (std::size_t i = 0; i < n_tasks; ++i) {
    const ForecastTask& task = plan.tasks[i];
    record.scheduled_points += task.horizon;
    record.prompt_tokens += results[i].prompt_tokens;
    record.completion_tokens += results[i].completion_tokens;
    if (!results[i].forecast) {
      ++record.parse_failures;
      continue;
    }
    for (std::size_t k = 0; k < task.horizon; ++k) {
      predictions.push_back((*results[i].forecast)[k]);
      truths.push_back(task.truth[k]);
      record.points.push_back({task.index, task.target_timestamps[k], task.truth[k], (*results[i].forecast)[k]});
    }
  }
  if (predictions.empty()) {
    throw Error(ErrorCode::AllTasksFailed, "no parseable reply in any of the " + std::to_string(n_tasks) + " tasks");
  }
  record.report = compute_metrics(predictions, truths);
  record.wall_time =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  return CellOutcome{std::move(record), std::move(traces)};
}

PromptChoice select_best(const std::vector<RunRecord>& records, Criterion criterion) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecordSet, "no records to select from");
  const CellKey& first = records.front().key;
  for (const auto& r : records) {
    const CellKey& k = r.key;
    if (k.dataset_id != first.dataset_id || k.horizon != first.horizon || k.split != Split::Validation ||
        k.censoring_level != 0.0 || k.replication != 0 || k.method != Method::Llm) {
      throw Error(ErrorCode::InvalidArgument,
                  "selection needs LLM validation records of one dataset and horizon, uncensored, replication 0");
    }
  }
  const auto rank = [criterion](const RunRecord& r) {
    return std::make_tuple(criterion_value(r.report, criterion), r.report.mae, to_string(r.key.format),
                           r.key.covariate.value_or(""));
  };
  const auto best = std::min_element(records.begin(), records.end(),
                                     [&](const RunRecord& a, const RunRecord& b) { return rank(a) < rank(b); });
  return PromptChoice{best->key.format, best->key.covariate};
}

std::vector<CellOutcome> replicate_cell(const CellKey& key, std::size_t n_replications, const CellData& data,
                                        Backend* backend, const EvalOptions& options, std::uint64_t base_seed) {
  if (n_replications == 0) throw Error(ErrorCode::InvalidArgument, "need at least one replication");
  std::vector<CellOutcome> out;
  out.reserve(n_replications);
  for (std::size_t r = 0; r < n_replications; ++r) {
    CellKey k = key;
    k.replication = r;
    out.push_back(evaluate_cell(k, data, backend, options, derive_seed(base_seed, {r})));
  }
  return out;
}

std::vector<CellOutcome> censoring_sweep(const CellKey& key_template, const std::vector<double>& levels,
                                         const std::vector<std::uint64_t>& seeds, const CellData& data,
                                         Backend* backend, const EvalOptions& options) {
  for (const double level : levels) {
    if (!(level >= 0.0 && level <= 1.0)) {
      throw Error(ErrorCode::RatioOutOfRange, "censoring level " + std::to_string(level) + " is outside [0, 1]");
    }
  }
  std::vector<CellOutcome> out;
  for (const double level : levels) {
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      CellKey k = key_template;
      k.censoring_level = level;
      k.replication = j;
      out.push_back(evaluate_cell(k, data, backend, options, seeds[j]));
    }
  }
  return out;
}

MetricTests compare_reports(const std::vector<MetricReport>& a, const std::vector<MetricReport>& b) {
  const auto column = [](const std::vector<MetricReport>& reports, auto pick) {
    std::vector<double> out;
    for (const auto& r : reports) {
      if (const auto v = pick(r)) out.push_back(*v);
    }
    return out;
  };
  const auto rmse = [](const MetricReport& r) { return std::optional<double>(r.rmse); };
  const auto mae = [](const MetricReport& r) { return std::optional<double>(r.mae); };
  const auto mape = [](const MetricReport& r) { return r.mape_percent; };

  MetricTests tests;
  tests.rmse = welch_t_test(column(a, rmse), column(b, rmse));
  tests.mae = welch_t_test(column(a, mae), column(b, mae));
  const auto mape_a = column(a, mape);
  const auto mape_b = column(b, mape);
  if (mape_a.size() >= 2 && mape_b.size() >= 2) tests.mape = welch_t_test(mape_a, mape_b);
  return tests;
}

}  // namespace covacast
