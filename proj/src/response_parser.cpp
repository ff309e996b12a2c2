#include "covacast/response_parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "covacast/error.hpp"

namespace covacast {

namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Blanks "```lang" markers in place so offsets stay valid for the caller.
std::string mask_fences(std::string_view reply) {
  std::string text(reply);
  for (std::size_t pos = text.find("```"); pos != std::string::npos; pos = text.find("```", pos)) {
    std::size_t end = pos;
    while (end < text.size() && text[end] == '`') ++end;
    while (end < text.size() && is_word(text[end])) ++end;
    for (std::size_t i = pos; i < end; ++i) text[i] = ' ';
    pos = end;
  }
  return text;
}

enum class TokenKind { Number, NonFinite, Other };

struct Token {
  TokenKind kind;
  double value = 0.0;
};

Token classify(std::string_view token) {
  std::string_view body = token;
  bool negative = false;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::string lowered;
  for (const char c : body) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lowered == "nan" || lowered == "inf" || lowered == "infinity") return {TokenKind::NonFinite};
  if (body.empty() || !(is_digit(body.front()) || (body.front() == '.' && body.size() > 1 && is_digit(body[1])))) {
    return {TokenKind::Other};
  }
  double value = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), value, std::chars_format::general);
  if (res.ec == std::errc::result_out_of_range) return {TokenKind::NonFinite};
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) return {TokenKind::Other};
  if (!std::isfinite(value)) return {TokenKind::NonFinite};
  return {TokenKind::Number, negative ? -value : value};
}

struct ListScan {
  bool numeric = false;
  bool non_finite = false;
  std::vector<double> values;
};

ListScan scan_list(std::string_view content) {
  ListScan scan;
  std::size_t i = 0;
  while (i < content.size()) {
    while (i < content.size() && (content[i] == ',' || std::isspace(static_cast<unsigned char>(content[i])))) ++i;
    if (i >= content.size()) break;
    std::size_t j = i;
    while (j < content.size() && content[j] != ',' && !std::isspace(static_cast<unsigned char>(content[j]))) ++j;
    const Token token = classify(content.substr(i, j - i));
    if (token.kind == TokenKind::Other) return ListScan{};
    if (token.kind == TokenKind::NonFinite) scan.non_finite = true;
    scan.values.push_back(token.value);
    i = j;
  }
  scan.numeric = true;
  return scan;
}

struct NumberMatch {
  double value;
  std::size_t begin;
  std::size_t end;
};

// Standalone decimal numbers: not glued to letters, digits, or dots on
// either side, so dates like 2024-01-15 and tags like W01 are skipped
// partially or wholly rather than misread as signed values.
std::vector<NumberMatch> scan_numbers(std::string_view text) {
  std::vector<NumberMatch> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    bool signed_start = false;
    if ((text[i] == '-' || text[i] == '+') && i + 1 < text.size() &&
        (is_digit(text[i + 1]) || (text[i + 1] == '.' && i + 2 < text.size() && is_digit(text[i + 2])))) {
      signed_start = true;
    } else if (!(is_digit(text[i]) || (text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1])))) {
      ++i;
      continue;
    }
    const bool glued_before = start > 0 && (is_word(text[start - 1]) || text[start - 1] == '.' ||
                                            (!signed_start && (text[start - 1] == '-' || text[start - 1] == '+')));
    std::size_t body = signed_start ? start + 1 : start;
    double value = 0.0;
    const auto res = std::from_chars(text.data() + body, text.data() + text.size(), value,
                                     std::chars_format::general);
    std::size_t end = static_cast<std::size_t>(res.ptr - text.data());
    if (res.ec != std::errc{} && res.ec != std::errc::result_out_of_range) {
      i = start + 1;
      continue;
    }
    // A trailing dot that ends a sentence belongs to the sentence.
    const bool glued_after = end < text.size() && (is_word(text[end]) ||
                                                   (text[end] == '.' && end + 1 < text.size() && is_digit(text[end + 1])));
    if (!glued_before && !glued_after) {
      if (res.ec == std::errc::result_out_of_range || !std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteToken,
                    "number '" + std::string(text.substr(start, end - start)) + "' is not finite");
      }
      out.push_back({text[start] == '-' ? -value : value, start, end});
    }
    // Skip the rest of a glued run so its tail is not read as a new number.
    while (end < text.size() && (is_word(text[end]) || text[end] == '.')) ++end;
    i = std::max(end, start + 1);
  }
  return out;
}

}  // namespace

ParsedForecast parse_forecast(std::string_view reply, std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (reply.empty()) throw Error(ErrorCode::NoNumbersFound, "empty reply");
  const std::string text = mask_fences(reply);

  // Innermost bracket pairs, scanned right to left: the last numeric list wins.
  for (std::size_t close = text.rfind(']'); close != std::string::npos;
       close = close == 0 ? std::string::npos : text.rfind(']', close - 1)) {
    const std::size_t open = text.rfind('[', close);
    if (open == std::string::npos) break;
    if (text.find(']', open) != close) continue;  // not innermost
    const ListScan scan = scan_list(std::string_view(text).substr(open + 1, close - open - 1));
    if (!scan.numeric) continue;
    if (scan.non_finite) throw Error(ErrorCode::NonFiniteToken, "list contains a non-finite entry");
    if (scan.values.size() != horizon) throw CountMismatchError(scan.values.size(), horizon);
    return ParsedForecast{scan.values, TextSpan{open, close + 1}};
  }

  const auto numbers = scan_numbers(text);
  if (numbers.empty()) throw Error(ErrorCode::NoNumbersFound, "reply contains no numbers");
  if (numbers.size() != horizon) throw CountMismatchError(numbers.size(), horizon);
  ParsedForecast out;
  for (const auto& n : numbers) out.values.push_back(n.value);
  out.source_span = TextSpan{numbers.front().begin, numbers.back().end};
  return out;
}

std::string render_list(std::span<const double> values) {
  std::string out = "[";
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    const auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    out.append(buf, res.ptr);
  }
  out += "]";
  return out;
}

}  // namespace covacast
