#include "covacast/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ostream>
#include <set>

#include "covacast/error.hpp"
#include "covacast/random.hpp"
#include "covacast/runlog.hpp"

namespace covacast {

using nlohmann::json;

std::unique_ptr<Backend> make_backend(const BackendSettings& settings) {
  switch (settings.kind) {
    case BackendKind::Oracle: return std::make_unique<OracleBackend>();
    case BackendKind::NoisyOracle: return std::make_unique<NoisyOracleBackend>(settings.noise_sd);
    case BackendKind::Scripted: return std::make_unique<ScriptedBackend>(settings.replies);
    case BackendKind::Live: return std::make_unique<HttpBackend>(settings.live);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown backend kind");
}

CellData build_cell_data(const ExperimentConfig& config, Dataset dataset) {
  CellData data{config.dataset.id, std::move(dataset.series), {}, config.splits};
  const auto timestamps = data.series.timestamps();
  std::set<std::string> wanted(config.covariates.begin(), config.covariates.end());
  for (const auto& cmp : config.comparators) {
    if (cmp.covariate) wanted.insert(*cmp.covariate);
  }
  for (const auto& name : wanted) {
    if (const auto kind = parse_covariate_kind(name)) {
      data.covariates.push_back(derive_covariate(timestamps, *kind));
      continue;
    }
    const auto it = std::find_if(dataset.extra_covariates.begin(), dataset.extra_covariates.end(),
                                 [&](const CovariateSeries& c) { return c.name == name; });
    if (it == dataset.extra_covariates.end()) throw Error(ErrorCode::MissingColumn, "no covariate column '" + name + "'");
    data.covariates.push_back(*it);
  }
  return data;
}

EvalOptions eval_options(const ExperimentConfig& config) {
  EvalOptions o;
  o.rolling = config.rolling;
  o.censor_scope = config.censoring.scope;
  o.knowledge_text = config.knowledge_text;
  o.temperature = config.backend.live.temperature;
  o.seasonal_period = config.baselines.seasonal_period.value_or(1);
  o.ar_order = config.baselines.ar_order;
  o.ar_differencing = config.baselines.ar_differencing;
  return o;
}

std::uint64_t cell_seed(std::uint64_t run_seed, const CellKey& key) {
  CellKey base = key;
  base.replication = 0;
  const std::string text = to_json(base).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(run_seed, {h, key.replication});
}

std::vector<CellKey> validation_grid(const ExperimentConfig& config, std::size_t horizon) {
  std::vector<CellKey> keys;
  const auto add = [&](PromptFormat f, std::optional<std::string> cov) {
    CellKey k;
    k.dataset_id = config.dataset.id;
    k.horizon = horizon;
    k.format = f;
    k.covariate = std::move(cov);
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(std::move(k));
  };
  for (const auto f : config.formats) {
    if (!accepts_covariate(f) || (!requires_covariate(f) && config.covariates.empty())) {
      add(f, std::nullopt);
      continue;
    }
    for (const auto& c : config.covariates) add(f, c);
  }
  return keys;
}

namespace {

// Forwards to the real backend and counts calls.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}

  CompletionResult complete(const PromptText& prompt, const RequestContext& context) override {
    calls_.fetch_add(1);
    return inner_.complete(prompt, context);
  }
  [[nodiscard]] std::string id() const override { return inner_.id(); }
  [[nodiscard]] std::size_t parallelism() const override { return inner_.parallelism(); }
  [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

 private:
  Backend& inner_;
  std::atomic<std::size_t> calls_{0};
};

json choice_json(PromptFormat f, const std::optional<std::string>& cov) {
  return json{{"format", std::string(to_string(f))}, {"covariate", cov ? json(*cov) : json(nullptr)}};
}

bool fatal(const Error& e) {
  switch (e.code()) {
    case ErrorCode::AuthMissing:
    case ErrorCode::InvalidConfig:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options, CellData data, CountingBackend* backend,
         RunLog& log)
      : config_(config), options_(options), data_(std::move(data)), backend_(backend), log_(log) {}

  void run() {
    for (const auto h : config_.horizons) run_horizon(h);
  }

  void dry_run() {
    const EvalOptions eval = eval_options(config_);
    for (const auto h : config_.horizons) {
      std::vector<CellKey> keys = validation_grid(config_, h);
      for (const auto& cmp : config_.comparators) {
        for (const auto split : {Split::Validation, Split::Test}) keys.push_back(llm_key(h, cmp.format, cmp.covariate, split));
      }
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
      for (const auto& key : keys) {
        try {
          for (const auto& t : render_cell_prompts(key, data_, eval, cell_seed(config_.seed, key))) {
            log_.append("prompt", {{"cell", to_json(key)}, {"task", t.task}, {"origin", format_iso(t.origin)},
                                   {"prompt", t.prompt}, {"dry_run", true}});
          }
        } catch (const Error& e) {
          if (fatal(e)) throw;
          fail(key, e);
        }
      }
    }
  }

  [[nodiscard]] std::size_t failures() const noexcept { return failures_; }
  [[nodiscard]] const std::vector<RunRecord>& records() const noexcept { return records_; }

 private:
  CellKey llm_key(std::size_t h, PromptFormat f, std::optional<std::string> cov, Split split) const {
    CellKey k;
    k.dataset_id = config_.dataset.id;
    k.horizon = h;
    k.format = f;
    k.covariate = std::move(cov);
    k.split = split;
    return k;
  }

  void progress(const std::string& line) {
    if (options_.progress) *options_.progress << line << '\n';
  }

  void fail(const CellKey& key, const Error& e) {
    ++failures_;
    log_.append("cell_failure", {{"cell", to_json(key)}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}});
    progress("cell failed: " + std::string(e.what()));
  }

  // Evaluates keys in order; outcomes are logged sorted by key.
  std::vector<RunRecord> evaluate(std::vector<CellKey> keys, const EvalOptions& eval) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<RunRecord> out;
    for (const auto& key : keys) {
      try {
        CellOutcome outcome = evaluate_cell(key, data_, backend_, eval, cell_seed(config_.seed, key));
        record(outcome);
        out.push_back(std::move(outcome.record));
      } catch (const Error& e) {
        if (fatal(e)) throw;
        fail(key, e);
      }
    }
    return out;
  }

  void record(const CellOutcome& outcome) {
    const RunRecord& r = outcome.record;
    const json cell = to_json(r.key);
    for (const auto& t : outcome.traces) {
      if (t.prompt.empty()) continue;
      log_.append("prompt", {{"cell", cell}, {"task", t.task}, {"origin", format_iso(t.origin)}, {"prompt", t.prompt}});
      for (std::size_t a = 0; a < t.replies.size(); ++a) {
        log_.append("reply", {{"cell", cell}, {"task", t.task}, {"attempt", a + 1}, {"text", t.replies[a]}});
      }
      if (t.parse_error) {
        log_.append("parse_failure",
                    {{"cell", cell}, {"task", t.task}, {"replies", t.replies}, {"error", *t.parse_error}});
      }
    }
    if (r.uncovered_points > 0) {
      const auto tag = std::make_pair(r.key.horizon, r.key.split);
      if (warned_tail_.insert(tag).second) {
        log_.append("warning", {{"message", std::to_string(r.uncovered_points) + " " + std::string(to_string(r.key.split)) +
                                                " points after the last full window are not scored at horizon " +
                                                std::to_string(r.key.horizon)}});
      }
    }
    log_.append("run_record", {{"record", to_json(r)}});
    records_.push_back(r);
    progress(std::string(to_string(r.key.stage)) + " h=" + std::to_string(r.key.horizon) + " " +
             std::string(to_string(r.key.split)) + " " + label(r.key) + " rmse=" + std::to_string(r.report.rmse));
  }

  static std::string label(const CellKey& k) {
    if (k.method != Method::Llm) return std::string(to_string(k.method));
    return std::string(to_string(k.format)) + (k.covariate ? "/" + *k.covariate : "");
  }

  void run_horizon(std::size_t h) {
    EvalOptions eval = eval_options(config_);

    const std::vector<RunRecord> grid = evaluate(validation_grid(config_, h), eval);
    if (grid.empty()) {
      log_.append("warning", {{"message", "no validation cell succeeded at horizon " + std::to_string(h) +
                                              "; selection skipped"}});
      return;
    }
    const PromptChoice best = select_best(grid, config_.selection_criterion);
    log_.append("selection", {{"dataset", config_.dataset.id},
                              {"horizon", h},
                              {"criterion", std::string(to_string(config_.selection_criterion))},
                              {"candidates", grid.size()},
                              {"choice", choice_json(best.format, best.covariate)}});

    std::vector<CellKey> keys{llm_key(h, best.format, best.covariate, Split::Test)};
    for (const auto& cmp : config_.comparators) {
      for (const auto split : {Split::Validation, Split::Test}) {
        CellKey k = llm_key(h, cmp.format, cmp.covariate, split);
        const bool in_grid = std::any_of(grid.begin(), grid.end(), [&](const RunRecord& r) { return r.key == k; });
        if (!in_grid) keys.push_back(std::move(k));
      }
    }
    for (const auto split : {Split::Validation, Split::Test}) {
      if (config_.baselines.seasonal_period) {
        CellKey k = llm_key(h, PromptFormat::NoCovariate, std::nullopt, split);
        k.method = Method::SeasonalNaive;
        keys.push_back(k);
      }
      if (config_.baselines.arima) {
        CellKey k = llm_key(h, PromptFormat::NoCovariate, std::nullopt, split);
        k.method = Method::Autoregressive;
        keys.push_back(k);
      }
    }
    (void)evaluate(keys, eval);

    if (config_.replications >= 2) replicate(h, best, eval);
    if (!config_.censoring.levels.empty()) censor(h, best, eval);
  }

  void replicate(std::size_t h, const PromptChoice& best, EvalOptions eval) {
    eval.temperature = config_.backend.replication_temperature;
    std::vector<PromptChoice> prompts{best};
    for (const auto& cmp : config_.comparators) {
      const PromptChoice c{cmp.format, cmp.covariate};
      if (std::find(prompts.begin(), prompts.end(), c) == prompts.end()) prompts.push_back(c);
    }
    for (const auto split : {Split::Validation, Split::Test}) {
      std::vector<std::vector<MetricReport>> samples(prompts.size());
      std::vector<bool> complete(prompts.size(), false);
      for (std::size_t i = 0; i < prompts.size(); ++i) {
        CellKey key = llm_key(h, prompts[i].format, prompts[i].covariate, split);
        key.stage = Stage::Replication;
        std::size_t ok = 0;
        for (std::size_t r = 0; r < config_.replications; ++r) {
          key.replication = r;
          try {
            CellOutcome outcome = evaluate_cell(key, data_, backend_, eval, cell_seed(config_.seed, key));
            record(outcome);
            samples[i].push_back(outcome.record.report);
            ++ok;
          } catch (const Error& e) {
            if (fatal(e)) throw;
            fail(key, e);
          }
        }
        complete[i] = ok >= 2;
      }
      for (std::size_t i = 1; i < prompts.size(); ++i) {
        if (!complete[0] || !complete[i]) continue;
        const MetricTests tests = compare_reports(samples[0], samples[i]);
        log_.append("t_test", {{"dataset", config_.dataset.id},
                               {"horizon", h},
                               {"split", std::string(to_string(split))},
                               {"best", choice_json(prompts[0].format, prompts[0].covariate)},
                               {"other", choice_json(prompts[i].format, prompts[i].covariate)},
                               {"n_best", samples[0].size()},
                               {"n_other", samples[i].size()},
                               {"rmse", to_json(tests.rmse)},
                               {"mae", to_json(tests.mae)},
                               {"mape", tests.mape ? to_json(*tests.mape) : json(nullptr)}});
      }
    }
  }

  void censor(std::size_t h, const PromptChoice& best, const EvalOptions& eval) {
    if (!best.covariate) {
      log_.append("warning", {{"message", "censoring sweep skipped at horizon " + std::to_string(h) +
                                              ": the selected prompt carries no covariate"}});
      return;
    }
    CellKey key = llm_key(h, best.format, best.covariate, Split::Test);
    key.stage = Stage::Censoring;
    for (const double level : config_.censoring.levels) {
      for (std::size_t j = 0; j < config_.censoring.seeds; ++j) {
        key.censoring_level = level;
        key.replication = j;
        try {
          CellOutcome outcome = evaluate_cell(key, data_, backend_, eval, cell_seed(config_.seed, key));
          record(outcome);
        } catch (const Error& e) {
          if (fatal(e)) throw;
          fail(key, e);
        }
      }
    }
  }

  const ExperimentConfig& config_;
  const RunOptions& options_;
  CellData data_;
  CountingBackend* backend_;
  RunLog& log_;
  std::size_t failures_ = 0;
  std::vector<RunRecord> records_;
  std::set<std::pair<std::size_t, Split>> warned_tail_;
};

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options, Backend* backend) {
  validate(config);
  RunSummary summary;
  summary.log_path = options.log_path.value_or(config.output_dir / "runlog.jsonl");
  RunLog log(config.seed, summary.log_path);
  log.append("config", {{"config", config_to_json(config)}, {"dry_run", options.dry_run}});

  CellData data = build_cell_data(config, load_dataset(config.dataset));

  std::unique_ptr<Backend> owned;
  if (backend == nullptr && !options.dry_run) {
    owned = make_backend(config.backend);
    backend = owned.get();
  }
  std::optional<CountingBackend> counting;
  if (backend != nullptr) counting.emplace(*backend);

  Runner runner(config, options, std::move(data), counting ? &*counting : nullptr, log);
  if (options.dry_run) {
    runner.dry_run();
  } else {
    runner.run();
  }

  summary.cell_failures = runner.failures();
  summary.backend_calls = counting ? counting->calls() : 0;
  summary.records = runner.records();
  summary.log = log.entries();
  summary.exit_code = summary.cell_failures > 0 ? kExitPartial : kExitSuccess;
  return summary;
}

}  // namespace covacast
