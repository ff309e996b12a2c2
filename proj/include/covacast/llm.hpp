#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "covacast/prompt.hpp"

namespace covacast {

inline constexpr std::string_view kApiKeyEnv = "COVACAST_API_KEY";

struct BackendConfig {
  std::string endpoint_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.0;
  std::size_t max_output_tokens = 256;
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_retries = 3;
  std::size_t parallelism_limit = 4;
  std::chrono::milliseconds backoff_base{500};

  /// Throws InvalidConfig.
  void validate() const;
};

struct CompletionResult {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t attempt_count = 1;
};

/// Per-request knobs. The seed makes stochastic offline backends
/// reproducible and is forwarded to live endpoints that honour it.
struct RequestContext {
  std::uint64_t seed = 0;
  std::optional<double> temperature;
};

/// Prompt-in, text-out completion provider. Implementations must tolerate
/// concurrent calls up to parallelism().
class Backend {
 public:
  virtual ~Backend() = default;

  virtual CompletionResult complete(const PromptText& prompt, const RequestContext& context) = 0;
  CompletionResult complete(const PromptText& prompt) { return complete(prompt, RequestContext{}); }

  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual std::size_t parallelism() const { return 1; }
};

/// Replays a fixed queue of replies in call order; throws
/// BackendUnavailable once the queue is empty.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies);

  CompletionResult complete(const PromptText& prompt, const RequestContext& context) override;
  [[nodiscard]] std::string id() const override { return "scripted"; }
  [[nodiscard]] std::size_t remaining() const;

  using Backend::complete;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> replies_;
};

/// Forecast of the deterministic covariate-aware oracle for a prompt built
/// by render_prompt: each future step gets the mean of the history values
/// sharing its covariate value, or the global history mean when the value
/// is unseen, censored, or the prompt carries no aligned covariates.
/// Throws UnparseablePrompt.
[[nodiscard]] std::vector<double> oracle_forecast(std::string_view prompt);

[[nodiscard]] CompletionResult oracle_backend_complete(const PromptText& prompt);

/// Offline test surrogate for a covariate-attentive model; not a language model.
class OracleBackend final : public Backend {
 public:
  CompletionResult complete(const PromptText& prompt, const RequestContext& context) override;
  [[nodiscard]] std::string id() const override { return "oracle"; }

  using Backend::complete;
};

/// Oracle forecast plus Gaussian noise with standard deviation
/// noise_sd * temperature (temperature defaults to 1), seeded from the
/// request seed and the prompt text.
class NoisyOracleBackend final : public Backend {
 public:
  explicit NoisyOracleBackend(double noise_sd);

  CompletionResult complete(const PromptText& prompt, const RequestContext& context) override;
  [[nodiscard]] std::string id() const override { return "noisy_oracle"; }

  using Backend::complete;

 private:
  double noise_sd_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// OpenAI-compatible chat-completions client: POST {endpoint}/chat/completions
/// with bearer auth, retrying 429/5xx/transport failures with exponential
/// backoff and jitter.
class HttpBackend final : public Backend {
 public:
  /// `api_key` empty means "read COVACAST_API_KEY at request time".
  HttpBackend(BackendConfig config, std::optional<std::string> api_key = std::nullopt, Sleeper sleeper = {});

  CompletionResult complete(const PromptText& prompt, const RequestContext& context) override;
  [[nodiscard]] std::string id() const override { return "http:" + config_.model_name; }
  [[nodiscard]] std::size_t parallelism() const override { return config_.parallelism_limit; }

  [[nodiscard]] std::uint64_t request_count() const noexcept { return requests_.load(); }
  [[nodiscard]] std::uint64_t retry_count() const noexcept { return retries_.load(); }

  using Backend::complete;

 private:
  BackendConfig config_;
  std::optional<std::string> api_key_;
  Sleeper sleeper_;
  std::counting_semaphore<> slots_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> retries_{0};
};

/// Delay before retry number `attempt` (0-based): base * 2^attempt, spread
/// by +-25% jitter drawn from `seed`.
[[nodiscard]] std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, std::size_t attempt,
                                                      std::uint64_t seed);

}  // namespace covacast
