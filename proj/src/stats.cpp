#include "covacast/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "covacast/error.hpp"

namespace covacast {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b);
// converges fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct Moments {
  double mean;
  double variance;  // unbiased
};

Moments moments(std::span<const double> xs) {
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size() - 1)};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta argument must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double p = regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return std::min(1.0, std::max(0.0, p));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::SampleTooSmall, "Welch test needs two values per sample, got " +
                                               std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = ma.variance / na;
  const double vb = mb.variance / nb;

  WelchResult result;
  if (va + vb == 0.0) {
    // Constant samples, typical of deterministic backends.
    result.degenerate = true;
    result.df = na + nb - 2.0;
    if (ma.mean == mb.mean) {
      result.t = 0.0;
      result.p_two_sided = 1.0;
    } else {
      result.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
      result.p_two_sided = 0.0;
    }
    return result;
  }
  result.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
  result.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  result.p_two_sided = student_t_two_sided_p(result.t, result.df);
  return result;
}

}  // namespace covacast
