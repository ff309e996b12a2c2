#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covacast/calendar.hpp"
#include "covacast/covariates.hpp"
#include "covacast/llm.hpp"
#include "covacast/metrics.hpp"
#include "covacast/prompt.hpp"
#include "covacast/series.hpp"

namespace covacast {

struct DatasetConfig {
  std::string id;
  std::filesystem::path path;
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  Frequency frequency = Frequency::Daily;
  std::vector<std::string> extra_covariate_columns;
  bool aggregate_daily = true;  // only consulted for 30-minute data
};

enum class BackendKind { Oracle, NoisyOracle, Scripted, Live };

[[nodiscard]] std::string_view to_string(BackendKind kind) noexcept;
[[nodiscard]] std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept;

struct BackendSettings {
  BackendKind kind = BackendKind::Oracle;
  BackendConfig live;                  // also carries the selection temperature
  double noise_sd = 1.0;               // noisy_oracle
  std::vector<std::string> replies;    // scripted
  double replication_temperature = 1.0;
};

struct Comparator {
  PromptFormat format = PromptFormat::NoCovariate;
  std::optional<std::string> covariate;

  bool operator==(const Comparator&) const = default;
};

struct BaselineSettings {
  std::optional<std::size_t> seasonal_period;  // seasonal naive runs when set
  bool arima = false;
  std::size_t ar_order = 2;
  int ar_differencing = 1;
};

struct CensoringSettings {
  std::vector<double> levels;
  std::size_t seeds = 1;
  CensorScope scope = CensorScope::Both;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  SplitSpec splits;
  std::vector<std::size_t> horizons;
  std::vector<PromptFormat> formats;
  std::vector<std::string> covariates;  // calendar kind names or extra column names
  std::optional<std::string> knowledge_text;
  Criterion selection_criterion = Criterion::Rmse;
  std::vector<Comparator> comparators;
  BaselineSettings baselines;
  std::size_t replications = 1;
  CensoringSettings censoring;
  RollingOptions rolling;
  BackendSettings backend;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
};

/// Frequency of the series the cells see (30-minute data aggregated to
/// daily totals reports Daily).
[[nodiscard]] Frequency effective_frequency(const DatasetConfig& dataset) noexcept;

/// YAML (or JSON) text to a JSON tree. Quoted scalars stay strings; plain
/// scalars become null, booleans, integers or reals when they read as such.
[[nodiscard]] nlohmann::json yaml_to_json(std::string_view text);

/// Applies "a.b.c=value" overrides; the value is read as a YAML scalar or
/// flow collection. Throws InvalidConfig.
void apply_override(nlohmann::json& tree, std::string_view assignment);

/// Throws InvalidConfig naming the offending key. A relative dataset path
/// is resolved against `base_dir`.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& tree,
                                                const std::filesystem::path& base_dir = {});

/// Full effective configuration; config_from_json(config_to_json(c)) == c.
[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads a YAML/JSON config file, applies overrides, validates.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path,
                                           const std::vector<std::string>& overrides = {});

/// Cross-field checks; throws InvalidConfig.
void validate(const ExperimentConfig& config);

}  // namespace covacast
