#include "covacast/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "covacast/error.hpp"

namespace covacast {

MetricReport compute_metrics(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  }
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no forecast points to score");

  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double pct_sum = 0.0;
  std::size_t pct_count = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i]) || !std::isfinite(truths[i])) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value at position " + std::to_string(i));
    }
    const double err = predictions[i] - truths[i];
    abs_sum += std::abs(err);
    sq_sum += err * err;
    if (truths[i] != 0.0) {
      pct_sum += std::abs(err / truths[i]);
      ++pct_count;
    }
  }
  const auto n = static_cast<double>(predictions.size());
  MetricReport report;
  report.mae = abs_sum / n;
  report.rmse = std::sqrt(sq_sum / n);
  // sqrt rounding can leave rmse an ulp under mae when all errors are equal.
  if (report.rmse < report.mae) report.rmse = report.mae;
  report.n_points = predictions.size();
  report.n_skipped_zero_truth = predictions.size() - pct_count;
  if (pct_count > 0) report.mape_percent = 100.0 * pct_sum / static_cast<double>(pct_count);
  return report;
}

double criterion_value(const MetricReport& report, Criterion criterion) noexcept {
  switch (criterion) {
    case Criterion::Rmse: return report.rmse;
    case Criterion::Mae: return report.mae;
    case Criterion::Mape: return report.mape_percent.value_or(std::numeric_limits<double>::infinity());
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace covacast
