#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace covacast {

struct TextSpan {
  std::size_t begin;  // byte offsets into the reply, [begin, end)
  std::size_t end;
};

struct ParsedForecast {
  std::vector<double> values;
  TextSpan source_span;
};

/// Extracts exactly `horizon` forecasts from a model reply.
///
/// Markdown code fences are ignored. The last bracketed list whose items
/// are all decimal numbers (comma or whitespace separated) wins; without
/// one, every standalone decimal number is collected in reading order.
/// Numbers may carry a sign, a decimal point and an exponent. Throws
/// NoNumbersFound, CountMismatchError, NonFiniteToken.
[[nodiscard]] ParsedForecast parse_forecast(std::string_view reply, std::size_t horizon);

/// "[a, b]" using the shortest representation that parses back to the
/// same double.
[[nodiscard]] std::string render_list(std::span<const double> values);

}  // namespace covacast
