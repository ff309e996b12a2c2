#include <doctest.h>

#include <cmath>
#include <random>

#include "covacast/error.hpp"
#include "covacast/response_parser.hpp"

using namespace covacast;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::vector<double> random_vector(std::mt19937_64& rng) {
  std::vector<double> v(1 + rng() % 12);
  for (auto& x : v) {
    switch (rng() % 4) {
      case 0: x = static_cast<double>(static_cast<std::int64_t>(rng() % 100000) - 50000); break;
      case 1: x = std::ldexp(static_cast<double>(rng() >> 11), -static_cast<int>(rng() % 80)); break;
      case 2: x = -std::ldexp(static_cast<double>(rng() >> 11), static_cast<int>(rng() % 40)); break;
      default: x = static_cast<double>(rng() % 1000) / 7.0; break;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("reply fixtures") {
  CHECK(parse_forecast("[1, 2, 3]", 3).values == std::vector<double>{1, 2, 3});

  const std::string fenced = "Here are the values:\n```\n[10.5, 11, 12]\n```";
  const ParsedForecast f = parse_forecast(fenced, 3);
  CHECK(f.values == std::vector<double>{10.5, 11, 12});
  CHECK(fenced.substr(f.source_span.begin, f.source_span.end - f.source_span.begin) == "[10.5, 11, 12]");

  CHECK(parse_forecast("```json\n[4, 5]\n```", 2).values == std::vector<double>{4, 5});

  // Echoed input first; the forecast is the last list.
  CHECK(parse_forecast("You gave [100, 120, 130]. Forecast: [140, 150]", 2).values == std::vector<double>{140, 150});

  try {
    (void)parse_forecast("[1, 2]", 3);
    FAIL("expected CountMismatch");
  } catch (const CountMismatchError& e) {
    CHECK(e.code() == ErrorCode::CountMismatch);
    CHECK(e.found() == 2);
    CHECK(e.expected() == 3);
  }
}

TEST_CASE("fallback scan and number syntax") {
  CHECK(parse_forecast("The next values are 12.5 and -3e2.", 2).values == std::vector<double>{12.5, -300});
  CHECK(parse_forecast("[1 2 3]", 3).values == std::vector<double>{1, 2, 3});
  CHECK(parse_forecast("[+1.5e1, .5]", 2).values == std::vector<double>{15, 0.5});
  // A non-numeric bracketed list does not count as the forecast list.
  CHECK(parse_forecast("[7, 8] then [Monday, Tuesday]", 2).values == std::vector<double>{7, 8});
  CHECK(code_of([] { (void)parse_forecast("no idea", 1); }) == ErrorCode::NoNumbersFound);
  CHECK(code_of([] { (void)parse_forecast("", 1); }) == ErrorCode::NoNumbersFound);
  CHECK(code_of([] { (void)parse_forecast("[1, NaN]", 2); }) == ErrorCode::NonFiniteToken);
  CHECK(code_of([] { (void)parse_forecast("[1, inf]", 2); }) == ErrorCode::NonFiniteToken);
  CHECK(code_of([] { (void)parse_forecast("[1e999]", 1); }) == ErrorCode::NonFiniteToken);
}

TEST_CASE("property: render_list round-trips exactly") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> v = random_vector(rng);
    const std::string text = render_list(v);
    const ParsedForecast p = parse_forecast(text, v.size());
    REQUIRE(p.values.size() == v.size());
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(p.values[k] == v[k]);
    CHECK(parse_forecast(text, v.size()).values == p.values);
  }
}

TEST_CASE("property: text around the final list never changes the result") {
  std::mt19937_64 rng(202);
  const std::vector<std::string> prefixes{"", "Sure! ", "Input was [1, 2, 3].\n", "```\n", "values 9 8 7: "};
  const std::vector<std::string> suffixes{"", " Done.", "\n```", ".", " (units)"};
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> v = random_vector(rng);
    const std::string list = render_list(v);
    const std::string reply = prefixes[rng() % prefixes.size()] + list + suffixes[rng() % suffixes.size()];
    CHECK(parse_forecast(reply, v.size()).values == v);
  }
}
