#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "covacast/error.hpp"
#include "covacast/llm.hpp"

namespace covacast {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path + /chat/completions
};

Endpoint split_endpoint(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "endpoint_url '" + url + "' has no scheme");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  std::string base = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  ep.path = base + "/chat/completions";
  return ep;
}

bool transient_status(int status) { return status == 429 || status >= 500; }

// Releases the concurrency slot on every exit path.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& slots) : slots_(slots) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& slots_;
};

}  // namespace

HttpBackend::HttpBackend(BackendConfig config, std::optional<std::string> api_key, Sleeper sleeper)
    : config_(std::move(config)),
      api_key_(std::move(api_key)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(config_.parallelism_limit, 1))) {
  config_.validate();
}

CompletionResult HttpBackend::complete(const PromptText& prompt, const RequestContext& context) {
  if (prompt.text.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  std::string key;
  if (api_key_) {
    key = *api_key_;
  } else if (const char* env = std::getenv(std::string(kApiKeyEnv).c_str()); env != nullptr) {
    key = env;
  }
  if (key.empty()) throw Error(ErrorCode::AuthMissing, std::string(kApiKeyEnv) + " is not set");

  const Endpoint endpoint = split_endpoint(config_.endpoint_url);
  nlohmann::json body = {
      {"model", config_.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})},
      {"temperature", context.temperature.value_or(config_.temperature)},
      {"max_tokens", config_.max_output_tokens},
      {"seed", static_cast<std::int64_t>(context.seed & 0x7fffffffffffffffULL)},
  };
  const std::string payload = body.dump();
  const httplib::Headers headers = {{"Authorization", "Bearer " + key}};

  SlotGuard slot(slots_);
  const auto started = std::chrono::steady_clock::now();
  std::string last_failure;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      retries_.fetch_add(1);
      sleeper_(backoff_delay(config_.backoff_base, attempt - 1, context.seed));
    }
    requests_.fetch_add(1);

    httplib::Client client(endpoint.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), static_cast<time_t>(micros.count()));
    client.set_read_timeout(seconds.count(), static_cast<time_t>(micros.count()));
    client.set_write_timeout(seconds.count(), static_cast<time_t>(micros.count()));

    const auto response = client.Post(endpoint.path, headers, payload, "application/json");
    if (!response) {
      last_failure = "transport error: " + httplib::to_string(response.error());
      continue;
    }
    if (transient_status(response->status)) {
      last_failure = "HTTP " + std::to_string(response->status);
      continue;
    }
    if (response->status < 200 || response->status >= 300) {
      throw Error(ErrorCode::BackendUnavailable,
                  "HTTP " + std::to_string(response->status) + ": " + response->body.substr(0, 200));
    }

    const auto parsed = nlohmann::json::parse(response->body, nullptr, false);
    if (parsed.is_discarded()) throw Error(ErrorCode::MalformedResponse, "reply is not JSON");
    const auto* content = [&]() -> const nlohmann::json* {
      if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) return nullptr;
      const auto& first = parsed["choices"][0];
      if (!first.contains("message") || !first["message"].contains("content")) return nullptr;
      const auto& c = first["message"]["content"];
      return c.is_string() ? &c : nullptr;
    }();
    if (content == nullptr) throw Error(ErrorCode::MalformedResponse, "reply lacks choices[0].message.content");

    CompletionResult result;
    result.text = content->get<std::string>();
    result.attempt_count = attempt + 1;
    result.latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    if (parsed.contains("usage") && parsed["usage"].is_object()) {
      result.prompt_tokens = parsed["usage"].value("prompt_tokens", std::size_t{0});
      result.completion_tokens = parsed["usage"].value("completion_tokens", std::size_t{0});
    }
    return result;
  }
  throw Error(ErrorCode::BackendUnavailable, "gave up after " + std::to_string(config_.max_retries + 1) +
                                                 " attempts; last failure: " + last_failure);
}

}  // namespace covacast
