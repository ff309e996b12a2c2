#include "covacast/baselines.hpp"

#include <Eigen/Dense>
#include <string>

#include "covacast/error.hpp"

namespace covacast {

namespace {

// Ridge damping, relative to the mean diagonal of the centred Gram matrix.
constexpr double kRidgeDamping = 1e-8;

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> out(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = out.size() - 1; i > 0; --i) out[i] -= out[i - 1];
    out.erase(out.begin());
  }
  return out;
}

}  // namespace

std::vector<double> seasonal_naive_forecast(std::span<const double> history, std::size_t period,
                                            std::size_t horizon) {
  if (period == 0) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  if (history.size() < period) {
    throw Error(ErrorCode::HistoryTooShort, "seasonal naive needs " + std::to_string(period) +
                                                " points, history has " + std::to_string(history.size()));
  }
  std::vector<double> out;
  out.reserve(horizon);
  const std::size_t cycle_start = history.size() - period;
  for (std::size_t k = 0; k < horizon; ++k) out.push_back(history[cycle_start + k % period]);
  return out;
}

ARModel fit_ar(std::span<const double> history, std::size_t p, int d) {
  if (d != 0 && d != 1) throw Error(ErrorCode::InvalidArgument, "differencing order must be 0 or 1");
  if (history.size() < p + static_cast<std::size_t>(d) + 2) {
    throw Error(ErrorCode::InsufficientData, "AR(" + std::to_string(p) + ") with d=" + std::to_string(d) +
                                                 " needs " + std::to_string(p + d + 2) + " points, got " +
                                                 std::to_string(history.size()));
  }
  const std::vector<double> z = difference(history, d);
  const auto m = static_cast<Eigen::Index>(z.size() - p);
  const auto cols = static_cast<Eigen::Index>(p);

  Eigen::MatrixXd x(m, cols);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t t = p + static_cast<std::size_t>(r);
    y(r) = z[t];
    for (Eigen::Index i = 0; i < cols; ++i) x(r, i) = z[t - 1 - static_cast<std::size_t>(i)];
  }

  // Centring absorbs the intercept, so damping never shrinks it.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  ARModel model;
  model.order_p = p;
  model.differencing_d = d;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(cols);
  if (p > 0) {
    const Eigen::MatrixXd gram = xc.transpose() * xc;
    const Eigen::VectorXd rhs = xc.transpose() * yc;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const auto diag = ldlt.vectorD().cwiseAbs();
    const double scale = diag.maxCoeff();
    const bool singular = ldlt.info() != Eigen::Success || scale == 0.0 || diag.minCoeff() <= 1e-12 * scale;
    if (singular) {
      const double lambda = kRidgeDamping * std::max(gram.trace() / static_cast<double>(p), 1.0);
      const Eigen::MatrixXd damped = gram + lambda * Eigen::MatrixXd::Identity(cols, cols);
      phi = damped.ldlt().solve(rhs);
      model.ridge_fallback = true;
    } else {
      phi = ldlt.solve(rhs);
    }
  }
  model.coefficients.assign(phi.data(), phi.data() + phi.size());
  model.intercept = y_mean - (p > 0 ? (x_mean * phi)(0) : 0.0);

  const Eigen::VectorXd resid = (y.array() - model.intercept).matrix() - (p > 0 ? Eigen::VectorXd(x * phi)
                                                                                 : Eigen::VectorXd::Zero(m));
  const auto dof = m > cols + 1 ? m - cols - 1 : m;
  model.training_residual_variance = resid.squaredNorm() / static_cast<double>(dof);
  return model;
}

std::vector<double> ar_forecast(const ARModel& model, std::span<const double> history, std::size_t horizon) {
  if (model.coefficients.size() != model.order_p) {
    throw Error(ErrorCode::InvalidArgument, "model coefficients do not match its order");
  }
  const std::size_t need = model.order_p + static_cast<std::size_t>(model.differencing_d);
  if (history.size() < need || history.empty()) {
    throw Error(ErrorCode::InsufficientData, "forecasting needs " + std::to_string(std::max<std::size_t>(need, 1)) +
                                                 " history points, got " + std::to_string(history.size()));
  }
  std::vector<double> z = difference(history, model.differencing_d);
  const std::size_t observed = z.size();
  for (std::size_t k = 0; k < horizon; ++k) {
    double next = model.intercept;
    for (std::size_t i = 0; i < model.order_p; ++i) next += model.coefficients[i] * z[z.size() - 1 - i];
    z.push_back(next);
  }
  std::vector<double> out(z.begin() + static_cast<std::ptrdiff_t>(observed), z.end());
  if (model.differencing_d == 1) {
    double level = history.back();
    for (auto& v : out) {
      level += v;
      v = level;
    }
  }
  return out;
}

}  // namespace covacast
