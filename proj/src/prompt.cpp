#include "covacast/prompt.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "covacast/error.hpp"

namespace covacast {

namespace {

constexpr std::string_view kContextParagraph =
    "The sequence represents a univariate time series with aligned covariates. These covariates exhibit "
    "recurring patterns (e.g., weekly or seasonal cycles) that influence the behavior of the series. Use both "
    "the observed values and the structure of the covariates to identify trends.";

std::string join_covariates(const CovariateSeries& cov, std::size_t begin, std::size_t end) {
  std::string out = "[";
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ", ";
    out += cov.entries[i].text();
  }
  out += "]";
  return out;
}

void check_alignment(const ForecastTask& task, const CovariateSeries& cov) {
  const std::size_t history = task.history.size();
  if (cov.size() != history + task.horizon) {
    throw Error(ErrorCode::CovariateMisaligned, "covariate '" + cov.name + "' has " + std::to_string(cov.size()) +
                                                    " entries, expected " +
                                                    std::to_string(history + task.horizon));
  }
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const Timestamp expected = i < history ? task.history[i].timestamp : task.target_timestamps[i - history];
    if (cov.entries[i].timestamp != expected) {
      throw Error(ErrorCode::CovariateMisaligned,
                  "covariate '" + cov.name + "' entry " + std::to_string(i) + " is at " +
                      format_iso(cov.entries[i].timestamp) + ", expected " + format_iso(expected));
    }
  }
}

// Data / Covariates / Prediction covariates block shared by the list formats.
std::string list_block(const ForecastTask& task, const CovariateSeries& cov, bool tight) {
  const std::size_t history = task.history.size();
  const std::string sep = tight ? ":" : ": ";
  std::string out;
  out += "Data" + sep + format_value_list(task.history.values()) + ". ";
  out += "Covariates" + sep + join_covariates(cov, 0, history) + ". ";
  out += "Prediction covariates: " + join_covariates(cov, history, cov.size()) + ". ";
  return out;
}

}  // namespace

std::string_view to_string(PromptFormat format) noexcept {
  switch (format) {
    case PromptFormat::NoCovariate: return "no_covariate";
    case PromptFormat::Coupled: return "coupled";
    case PromptFormat::Decoupled: return "decoupled";
    case PromptFormat::Contextualized: return "contextualized";
    case PromptFormat::PromptCast: return "prompt_cast";
    case PromptFormat::KnowledgeGuided: return "knowledge_guided";
  }
  return "unknown";
}

std::optional<PromptFormat> parse_prompt_format(std::string_view name) noexcept {
  for (const auto format : {PromptFormat::NoCovariate, PromptFormat::Coupled, PromptFormat::Decoupled,
                            PromptFormat::Contextualized, PromptFormat::PromptCast,
                            PromptFormat::KnowledgeGuided}) {
    if (to_string(format) == name) return format;
  }
  return std::nullopt;
}

std::string_view display_name(PromptFormat format) noexcept {
  switch (format) {
    case PromptFormat::NoCovariate: return "No-Covariate";
    case PromptFormat::Coupled: return "Coupled";
    case PromptFormat::Decoupled: return "Decoupled";
    case PromptFormat::Contextualized: return "Contextualized";
    case PromptFormat::PromptCast: return "PromptCast";
    case PromptFormat::KnowledgeGuided: return "Knowledge-Guided";
  }
  return "Unknown";
}

bool requires_covariate(PromptFormat format) noexcept {
  return format == PromptFormat::Coupled || format == PromptFormat::Decoupled ||
         format == PromptFormat::Contextualized || format == PromptFormat::KnowledgeGuided;
}

bool accepts_covariate(PromptFormat format) noexcept { return format != PromptFormat::NoCovariate; }

void validate(const PromptSpec& spec) {
  if (spec.format == PromptFormat::NoCovariate && spec.covariate) {
    throw Error(ErrorCode::InvalidArgument, "the no-covariate format takes no covariate");
  }
  if (requires_covariate(spec.format) && !spec.covariate) {
    throw Error(ErrorCode::MissingCovariates,
                "format '" + std::string(to_string(spec.format)) + "' needs a covariate");
  }
  if (spec.format == PromptFormat::KnowledgeGuided && (!spec.knowledge_text || spec.knowledge_text->empty())) {
    throw Error(ErrorCode::MissingKnowledgeText, "knowledge-guided prompts need knowledge text");
  }
}

std::string format_value(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "cannot render a non-finite value");
  if (x == 0.0) return "0";  // also folds -0
  char buf[400];
  if (x == std::trunc(x)) {
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 0);
    return std::string(buf, res.ptr);
  }
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 6);
  std::string out(buf, res.ptr);
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  if (out == "-0") out = "0";
  return out;
}

std::string format_value_list(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_value(values[i]);
  }
  out += "]";
  return out;
}

std::size_t estimate_tokens(std::string_view text) noexcept {
  std::size_t count = 0;
  bool in_word = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      if (!in_word) ++count;
      in_word = true;
    } else {
      in_word = false;
      if (!std::isspace(c)) ++count;
    }
  }
  return count;
}

std::size_t whitespace_token_count(std::string_view text) noexcept {
  std::size_t count = 0;
  bool in_token = false;
  for (const char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

PromptText render_prompt(const PromptSpec& spec, const ForecastTask& task, const CovariateSeries* covariates) {
  validate(spec);
  if (task.horizon == 0 || task.target_timestamps.size() != task.horizon) {
    throw Error(ErrorCode::InvalidArgument, "task horizon and target timestamps disagree");
  }
  if (requires_covariate(spec.format) && covariates == nullptr) {
    throw Error(ErrorCode::MissingCovariates,
                "format '" + std::string(to_string(spec.format)) + "' needs covariate values");
  }
  const bool uses_covariate = accepts_covariate(spec.format) && spec.covariate && covariates != nullptr;
  if (uses_covariate) check_alignment(task, *covariates);

  const std::string h = std::to_string(task.horizon);
  const auto values = task.history.values();
  std::string text;

  switch (spec.format) {
    case PromptFormat::NoCovariate:
      text = "data: " + format_value_list(values) + ". Predict the next " + h +
             " values of the time series. Just return the values as a list. No explanation.";
      break;
    case PromptFormat::Coupled: {
      const std::size_t history = task.history.size();
      for (std::size_t i = 0; i < covariates->size(); ++i) {
        if (i > 0) text += ", ";
        text += covariates->entries[i].text();
        text += ": ";
        if (i < history) text += format_value(values[i]);
      }
      text += "\n\nPredict the next " + h +
              " values in the time series. Just return the values as a list. No explanation.";
      break;
    }
    case PromptFormat::Decoupled:
      text = list_block(task, *covariates, false) + "Predict the next " + h +
             " values of the time series. Just return the prediction values as a list. No explanation.";
      break;
    case PromptFormat::Contextualized:
      text = list_block(task, *covariates, true) + std::string(kContextParagraph) + " Predict the next " + h +
             " values based on the observed sequence and the upcoming covariate pattern. Just return the "
             "prediction values as a list. No explanation.";
      break;
    case PromptFormat::PromptCast: {
      std::string first;
      std::string last;
      if (uses_covariate) {
        first = covariates->entries.front().text();
        last = covariates->entries[task.history.size() - 1].text();
      } else {
        first = format_for(task.history.front().timestamp, task.history.frequency());
        last = format_for(task.history.back().timestamp, task.history.frequency());
      }
      text = "From " + first + " to " + last + ", there were " + format_value_list(values) +
             " values recorded. Predict the next " + h +
             " values. Just return the prediction values as a list of numbers. No explanation.";
      break;
    }
    case PromptFormat::KnowledgeGuided:
      text = *spec.knowledge_text + " " + list_block(task, *covariates, false) + "Predict the next " + h +
             " values of the time series. Just return the prediction values as a list. No explanation.";
      break;
  }
  PromptText out;
  out.token_estimate = estimate_tokens(text);
  out.text = std::move(text);
  return out;
}

}  // namespace covacast
