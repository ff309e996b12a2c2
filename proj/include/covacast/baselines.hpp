#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covacast {

/// Step k (1-based) repeats the value `period` steps before the end of the
/// last full cycle: history[n - period + (k - 1) mod period].
/// Throws HistoryTooShort.
[[nodiscard]] std::vector<double> seasonal_naive_forecast(std::span<const double> history, std::size_t period,
                                                          std::size_t horizon);

/// Conditional least-squares AR(p) on the d-times differenced series:
///   z_t = intercept + sum_i coefficients[i] * z_{t-1-i} + e_t
struct ARModel {
  std::size_t order_p = 0;
  int differencing_d = 0;  // 0 or 1
  std::vector<double> coefficients;
  double intercept = 0.0;
  double training_residual_variance = 0.0;
  bool ridge_fallback = false;  // lag design was singular; solved with damping
};

/// Needs at least p + d + 2 observations; throws InsufficientData.
[[nodiscard]] ARModel fit_ar(std::span<const double> history, std::size_t p, int d);

/// Iterates the fitted recursion, feeding forecasts back as lags, then
/// undoes the differencing from the last observed level.
[[nodiscard]] std::vector<double> ar_forecast(const ARModel& model, std::span<const double> history,
                                              std::size_t horizon);

}  // namespace covacast
