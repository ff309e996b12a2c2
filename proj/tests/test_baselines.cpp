#include <doctest.h>

#include <cmath>
#include <random>

#include "covacast/baselines.hpp"
#include "covacast/error.hpp"
#include "covacast/metrics.hpp"
#include "covacast/random.hpp"
#include "support.hpp"

using namespace covacast;

namespace {

std::vector<double> simulate_ar(const std::vector<double>& phi, double sd, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> y(n + 200, 0.0);
  for (std::size_t t = phi.size(); t < y.size(); ++t) {
    double v = sd * standard_normal(rng);
    for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * y[t - 1 - i];
    y[t] = v;
  }
  return {y.end() - static_cast<std::ptrdiff_t>(n), y.end()};  // drop burn-in
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("seasonal naive") {
  CHECK(seasonal_naive_forecast(std::vector<double>{1, 2, 3, 1, 2, 3}, 3, 2) == std::vector<double>{1, 2});
  CHECK(seasonal_naive_forecast(std::vector<double>{1, 2, 3, 1, 2, 3}, 3, 5) == std::vector<double>{1, 2, 3, 1, 2});
  CHECK(seasonal_naive_forecast(std::vector<double>{4, 9, 7}, 1, 3) == std::vector<double>{7, 7, 7});
  CHECK(code_of([] { (void)seasonal_naive_forecast(std::vector<double>{1, 2}, 3, 1); }) == ErrorCode::HistoryTooShort);

  std::vector<double> periodic;
  for (int i = 0; i < 48; ++i) periodic.push_back(100.0 + 10.0 * std::sin(i * 3.14159265358979 / 6.0));
  const std::vector<double> history(periodic.begin(), periodic.begin() + 36);
  const std::vector<double> next(periodic.begin() + 36, periodic.end());
  CHECK(compute_metrics(seasonal_naive_forecast(history, 12, 12), next).mae < 1e-9);
}

TEST_CASE("property: seasonal naive ignores history before the last period") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    const std::size_t period = 1 + rng() % 12;
    std::vector<double> a(period + rng() % 30);
    for (auto& v : a) v = static_cast<double>(rng() % 100);
    std::vector<double> b = a;
    for (std::size_t k = 0; k + period < b.size(); ++k) b[k] = static_cast<double>(rng() % 100);
    const std::size_t h = 1 + rng() % 30;
    CHECK(seasonal_naive_forecast(a, period, h) == seasonal_naive_forecast(b, period, h));
  }
}

TEST_CASE("AR recovery on seeded simulations") {
  const ARModel ar1 = fit_ar(simulate_ar({0.6}, 0.01, 500, 1), 1, 0);
  CHECK(ar1.coefficients[0] >= 0.55);
  CHECK(ar1.coefficients[0] <= 0.65);

  const ARModel ar2 = fit_ar(simulate_ar({0.6, -0.28}, 1.0, 1000, 2), 2, 0);
  CHECK(std::fabs(ar2.coefficients[0] - 0.6) <= 0.05);
  CHECK(std::fabs(ar2.coefficients[1] + 0.28) <= 0.05);
  CHECK(ar2.training_residual_variance == doctest::Approx(1.0).epsilon(0.15));
  CHECK_FALSE(ar2.ridge_fallback);
}

TEST_CASE("hand recursions") {
  ARModel half;
  half.order_p = 1;
  half.coefficients = {0.5};
  CHECK(ar_forecast(half, std::vector<double>{3, 8}, 3) == std::vector<double>{4, 2, 1});

  ARModel walk;
  walk.order_p = 1;
  walk.coefficients = {1.0};
  CHECK(ar_forecast(walk, std::vector<double>{1, 6.5}, 4) == std::vector<double>{6.5, 6.5, 6.5, 6.5});

  ARModel drift;
  drift.differencing_d = 1;
  drift.intercept = 2.5;
  CHECK(ar_forecast(drift, std::vector<double>{1, 4, 10}, 4) == std::vector<double>{12.5, 15, 17.5, 20});

  // Drift fitted from a line recovers the slope exactly.
  const ARModel fitted = fit_ar(std::vector<double>{3, 5, 7, 9, 11}, 0, 1);
  CHECK(fitted.intercept == doctest::Approx(2.0));
  CHECK(ar_forecast(fitted, std::vector<double>{3, 5, 7, 9, 11}, 2)[1] == doctest::Approx(15.0));
}

TEST_CASE("constant series and insufficient data") {
  const std::vector<double> flat(40, 7.0);
  for (std::size_t p = 1; p <= 3; ++p) {
    const ARModel m = fit_ar(flat, p, 0);
    CHECK(m.ridge_fallback);
    for (const double c : m.coefficients) CHECK(std::fabs(c) < 1e-9);
    CHECK(m.intercept == doctest::Approx(7.0));
    CHECK(m.training_residual_variance >= 0.0);
  }
  CHECK(code_of([] { (void)fit_ar(std::vector<double>{1, 2, 3}, 2, 0); }) == ErrorCode::InsufficientData);
  CHECK(code_of([] { (void)fit_ar(std::vector<double>{1, 2, 3, 4}, 2, 1); }) == ErrorCode::InsufficientData);
  ARModel two;
  two.order_p = 2;
  two.coefficients = {0.1, 0.1};
  CHECK(code_of([&] { (void)ar_forecast(two, std::vector<double>{1}, 1); }) == ErrorCode::InsufficientData);
}

TEST_CASE("property: residuals are orthogonal to every lag regressor") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + rng() % 4;
    const int d = static_cast<int>(rng() % 2);
    std::vector<double> y(60 + rng() % 100);
    double level = 0.0;
    for (auto& v : y) {
      level += standard_normal(rng);
      v = d == 1 ? level : standard_normal(rng) * 3.0 + 10.0;
    }
    const ARModel m = fit_ar(y, p, d);
    std::vector<double> z(y);
    if (d == 1) {
      for (std::size_t i = z.size() - 1; i > 0; --i) z[i] -= z[i - 1];
      z.erase(z.begin());
    }
    double resid_sum = 0.0;
    std::vector<double> dots(p, 0.0);
    std::vector<double> norms(p, 0.0);
    double resid_norm = 0.0;
    for (std::size_t t = p; t < z.size(); ++t) {
      double fit = m.intercept;
      for (std::size_t i = 0; i < p; ++i) fit += m.coefficients[i] * z[t - 1 - i];
      const double e = z[t] - fit;
      resid_sum += e;
      resid_norm += e * e;
      for (std::size_t i = 0; i < p; ++i) {
        dots[i] += e * z[t - 1 - i];
        norms[i] += z[t - 1 - i] * z[t - 1 - i];
      }
    }
    CHECK(std::fabs(resid_sum) <= 1e-6 * std::sqrt(resid_norm * static_cast<double>(z.size())));
    for (std::size_t i = 0; i < p; ++i) CHECK(std::fabs(dots[i]) <= 1e-6 * std::sqrt(resid_norm * norms[i]));
  }
}

TEST_CASE("property: stationary forecasts converge to the process mean") {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    ARModel m;
    m.order_p = 1 + rng() % 3;
    double budget = 0.9;
    for (std::size_t i = 0; i < m.order_p; ++i) {
      const double c = (uniform_unit(rng) * 2.0 - 1.0) * budget / static_cast<double>(m.order_p);
      m.coefficients.push_back(c);
    }
    m.intercept = (uniform_unit(rng) - 0.5) * 20.0;
    std::vector<double> history(m.order_p);
    for (auto& v : history) v = (uniform_unit(rng) - 0.5) * 100.0;
    double sum_phi = 0.0;
    for (const double c : m.coefficients) sum_phi += c;
    const double target = m.intercept / (1.0 - sum_phi);
    const double last = ar_forecast(m, history, 200).back();
    CHECK(std::fabs(last - target) <= 1e-3 * std::max(1.0, std::fabs(target)));
  }
}
