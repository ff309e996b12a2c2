#include "covacast/llm.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <random>

#include "covacast/error.hpp"
#include "covacast/random.hpp"
#include "covacast/response_parser.hpp"

namespace covacast {

void BackendConfig::validate() const {
  if (parallelism_limit < 1) throw Error(ErrorCode::InvalidConfig, "parallelism_limit must be at least 1");
  if (max_retries > 10) throw Error(ErrorCode::InvalidConfig, "max_retries must not exceed 10");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be non-negative");
  if (max_output_tokens == 0) throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be positive");
  if (endpoint_url.empty()) throw Error(ErrorCode::InvalidConfig, "endpoint_url is empty");
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}

CompletionResult ScriptedBackend::complete(const PromptText& prompt, const RequestContext&) {
  if (prompt.text.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  std::lock_guard lock(mutex_);
  if (replies_.empty()) throw Error(ErrorCode::BackendUnavailable, "scripted backend has no replies left");
  CompletionResult result;
  result.text = std::move(replies_.front());
  replies_.pop_front();
  result.prompt_tokens = prompt.token_estimate;
  result.completion_tokens = estimate_tokens(result.text);
  return result;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return replies_.size();
}

namespace {

[[noreturn]] void unparseable(const std::string& why) { throw Error(ErrorCode::UnparseablePrompt, why); }

double parse_number(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    unparseable("'" + std::string(token) + "' is not a number");
  }
  return value;
}

std::vector<std::string_view> split_items(std::string_view list) {
  std::vector<std::string_view> out;
  if (list.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = list.find(", ", pos);
    out.push_back(list.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  return out;
}

// Contents of the first "[...]" at or after `from`; advances `from` past it.
std::string_view bracket_after(std::string_view text, std::size_t& from) {
  const std::size_t open = text.find('[', from);
  if (open == std::string_view::npos) unparseable("missing list");
  const std::size_t close = text.find(']', open);
  if (close == std::string_view::npos) unparseable("unterminated list");
  from = close + 1;
  return text.substr(open + 1, close - open - 1);
}

std::size_t requested_horizon(std::string_view prompt) {
  constexpr std::string_view kMarker = "Predict the next ";
  const std::size_t pos = prompt.rfind(kMarker);
  if (pos == std::string_view::npos) unparseable("no forecast request");
  std::size_t h = 0;
  const char* begin = prompt.data() + pos + kMarker.size();
  const auto res = std::from_chars(begin, prompt.data() + prompt.size(), h);
  if (res.ec != std::errc{} || h == 0) unparseable("no horizon in the forecast request");
  return h;
}

struct ParsedPrompt {
  std::vector<double> values;
  std::vector<std::string> history_keys;  // empty when the prompt has no covariates
  std::vector<std::string> future_keys;
};

ParsedPrompt parse_prompt(std::string_view prompt) {
  ParsedPrompt parsed;
  const std::size_t horizon = requested_horizon(prompt);

  if (const std::size_t future_at = prompt.find("Prediction covariates:"); future_at != std::string_view::npos) {
    std::size_t data_at = prompt.find("Data:");
    if (data_at == std::string_view::npos || data_at > future_at) unparseable("missing Data list");
    for (const auto item : split_items(bracket_after(prompt, data_at))) parsed.values.push_back(parse_number(item));
    std::size_t cov_at = prompt.find("Covariates:", data_at);
    if (cov_at == std::string_view::npos || cov_at > future_at) unparseable("missing Covariates list");
    for (const auto item : split_items(bracket_after(prompt, cov_at))) parsed.history_keys.emplace_back(item);
    std::size_t fut = future_at;
    for (const auto item : split_items(bracket_after(prompt, fut))) parsed.future_keys.emplace_back(item);
    if (parsed.history_keys.size() != parsed.values.size()) unparseable("covariate list length mismatch");
  } else if (const std::size_t request = prompt.find("\n\nPredict"); request != std::string_view::npos) {
    // Coupled: "k: v, k: v, ..., k: , k: " ahead of the request.
    for (const auto item : split_items(prompt.substr(0, request))) {
      if (item.size() >= 2 && item.substr(item.size() - 2) == ": ") {
        parsed.future_keys.emplace_back(item.substr(0, item.size() - 2));
        continue;
      }
      if (!parsed.future_keys.empty()) unparseable("observation after a future covariate");
      const std::size_t colon = item.rfind(": ");
      if (colon == std::string_view::npos) unparseable("coupled entry without ': '");
      parsed.history_keys.emplace_back(item.substr(0, colon));
      parsed.values.push_back(parse_number(item.substr(colon + 2)));
    }
  } else {
    std::size_t at = prompt.find("data:");
    if (at == std::string_view::npos) at = prompt.find("there were [");
    if (at == std::string_view::npos) unparseable("no data section recognised");
    for (const auto item : split_items(bracket_after(prompt, at))) parsed.values.push_back(parse_number(item));
  }

  if (parsed.values.empty()) unparseable("empty history");
  if (!parsed.future_keys.empty() && parsed.future_keys.size() != horizon) {
    unparseable("future covariates disagree with the requested horizon");
  }
  if (parsed.future_keys.empty()) parsed.future_keys.assign(horizon, std::string(kCensoredToken));
  return parsed;
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> oracle_forecast(std::string_view prompt) {
  const ParsedPrompt parsed = parse_prompt(prompt);

  double total = 0.0;
  for (const double v : parsed.values) total += v;
  const double global_mean = total / static_cast<double>(parsed.values.size());

  std::map<std::string, std::pair<double, std::size_t>, std::less<>> groups;
  for (std::size_t i = 0; i < parsed.history_keys.size(); ++i) {
    if (parsed.history_keys[i] == kCensoredToken) continue;
    auto& [sum, count] = groups[parsed.history_keys[i]];
    sum += parsed.values[i];
    ++count;
  }

  std::vector<double> out;
  out.reserve(parsed.future_keys.size());
  for (const auto& key : parsed.future_keys) {
    const auto it = key == kCensoredToken ? groups.end() : groups.find(key);
    out.push_back(it == groups.end() ? global_mean : it->second.first / static_cast<double>(it->second.second));
  }
  return out;
}

CompletionResult oracle_backend_complete(const PromptText& prompt) {
  CompletionResult result;
  result.text = render_list(oracle_forecast(prompt.text));
  result.prompt_tokens = prompt.token_estimate;
  result.completion_tokens = estimate_tokens(result.text);
  return result;
}

CompletionResult OracleBackend::complete(const PromptText& prompt, const RequestContext&) {
  return oracle_backend_complete(prompt);
}

NoisyOracleBackend::NoisyOracleBackend(double noise_sd) : noise_sd_(noise_sd) {
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error(ErrorCode::InvalidConfig, "noise_sd must be finite and non-negative");
  }
}

CompletionResult NoisyOracleBackend::complete(const PromptText& prompt, const RequestContext& context) {
  std::vector<double> forecast = oracle_forecast(prompt.text);
  const double sd = noise_sd_ * context.temperature.value_or(1.0);
  if (sd > 0.0) {
    std::mt19937_64 rng(derive_seed(context.seed, {fnv1a(prompt.text)}));
    for (auto& v : forecast) v += sd * standard_normal(rng);
  }
  CompletionResult result;
  result.text = render_list(forecast);
  result.prompt_tokens = prompt.token_estimate;
  result.completion_tokens = estimate_tokens(result.text);
  return result;
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, std::size_t attempt, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {attempt}));
  const double nominal = static_cast<double>(base.count()) * std::ldexp(1.0, static_cast<int>(attempt));
  const double jitter = (uniform_unit(rng) * 2.0 - 1.0) * 0.25 * nominal;
  return std::chrono::milliseconds{static_cast<long long>(std::llround(nominal + jitter))};
}

}  // namespace covacast
