#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace covacast {

/// Accuracy of one pooled set of forecast/truth pairs.
///
/// MAPE is in percent and only covers pairs with nonzero truth; the number
/// of skipped pairs is kept so the exclusion is never silent. When every
/// truth is zero, `mape_percent` is empty.
struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape_percent;
  std::size_t n_points = 0;
  std::size_t n_skipped_zero_truth = 0;

  bool operator==(const MetricReport&) const = default;
};

/// Throws LengthMismatch, EmptyInput, NonFiniteValue.
[[nodiscard]] MetricReport compute_metrics(std::span<const double> predictions, std::span<const double> truths);

enum class Criterion { Rmse, Mae, Mape };

/// The criterion's value; an undefined MAPE ranks as +infinity.
[[nodiscard]] double criterion_value(const MetricReport& report, Criterion criterion) noexcept;

}  // namespace covacast
