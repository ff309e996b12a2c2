#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <memory>
#include <optional>
#include <vector>

#include "covacast/config.hpp"
#include "covacast/dataset.hpp"
#include "covacast/experiment.hpp"
#include "covacast/llm.hpp"

namespace covacast {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

[[nodiscard]] std::unique_ptr<Backend> make_backend(const BackendSettings& settings);

/// Series plus every configured covariate, aligned to the series.
[[nodiscard]] CellData build_cell_data(const ExperimentConfig& config, Dataset dataset);

[[nodiscard]] EvalOptions eval_options(const ExperimentConfig& config);

/// Seed of one cell: a hash of its key (replication excluded) mixed with
/// the run seed and the replication index.
[[nodiscard]] std::uint64_t cell_seed(std::uint64_t run_seed, const CellKey& key);

/// Validation grid of one horizon: every format with every covariate it
/// accepts (no-covariate formats once; PromptCast once per covariate, or
/// once with dates when no covariate is configured).
[[nodiscard]] std::vector<CellKey> validation_grid(const ExperimentConfig& config, std::size_t horizon);

struct RunOptions {
  bool dry_run = false;                   // render and log prompts only
  std::optional<std::filesystem::path> log_path;  // default: <output_dir>/runlog.jsonl; empty path keeps it in memory
  std::ostream* progress = nullptr;
};

struct RunSummary {
  int exit_code = kExitSuccess;
  std::size_t cell_failures = 0;
  std::size_t backend_calls = 0;
  std::vector<RunRecord> records;        // log order
  std::vector<nlohmann::json> log;
  std::filesystem::path log_path;
};

/// Validation grid per horizon, selection, test split for the selected pair
/// and the comparators (comparators and baselines on both splits),
/// replications with Welch tests when replications >= 2, and the censoring
/// sweep when levels are configured. Per-cell errors are logged and make the
/// exit code partial; configuration, data and authentication errors
/// propagate. `backend` overrides the configured one.
[[nodiscard]] RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {},
                                        Backend* backend = nullptr);

}  // namespace covacast
