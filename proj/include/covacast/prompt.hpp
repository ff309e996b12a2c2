#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "covacast/covariates.hpp"
#include "covacast/series.hpp"

namespace covacast {

enum class PromptFormat { NoCovariate, Coupled, Decoupled, Contextualized, PromptCast, KnowledgeGuided };

/// Config names: no_covariate, coupled, decoupled, contextualized,
/// prompt_cast, knowledge_guided.
[[nodiscard]] std::string_view to_string(PromptFormat format) noexcept;
[[nodiscard]] std::optional<PromptFormat> parse_prompt_format(std::string_view name) noexcept;
[[nodiscard]] std::string_view display_name(PromptFormat format) noexcept;

/// Whether the format cannot be rendered without a covariate. PromptCast
/// takes one optionally and falls back to the history dates.
[[nodiscard]] bool requires_covariate(PromptFormat format) noexcept;
[[nodiscard]] bool accepts_covariate(PromptFormat format) noexcept;

struct PromptSpec {
  PromptFormat format = PromptFormat::NoCovariate;
  std::optional<std::string> covariate;       // covariate name; empty for NoCovariate
  std::optional<std::string> knowledge_text;  // required for KnowledgeGuided
};

/// Throws InvalidArgument / MissingKnowledgeText when the spec breaks its
/// invariants.
void validate(const PromptSpec& spec);

struct PromptText {
  std::string text;
  std::size_t token_estimate = 0;
};

/// Integers without a decimal point, otherwise fixed notation with six
/// fractional digits and trailing zeros trimmed. Throws NonFiniteValue.
[[nodiscard]] std::string format_value(double x);

/// "[a, b, c]" with format_value elements.
[[nodiscard]] std::string format_value_list(std::span<const double> values);

/// Word runs plus punctuation marks; a cost proxy, not a model tokenizer.
[[nodiscard]] std::size_t estimate_tokens(std::string_view text) noexcept;

/// Whitespace-delimited pieces.
[[nodiscard]] std::size_t whitespace_token_count(std::string_view text) noexcept;

/// Renders `task` in the template of `spec.format`. `covariates`, when
/// given, must cover the task's history followed by its horizon, timestamp
/// for timestamp. Throws MissingCovariates, CovariateMisaligned,
/// MissingKnowledgeText.
[[nodiscard]] PromptText render_prompt(const PromptSpec& spec, const ForecastTask& task,
                                       const CovariateSeries* covariates);

}  // namespace covacast
