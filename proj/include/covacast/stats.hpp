#pragma once

#include <span>

namespace covacast {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  bool degenerate = false;  // both samples constant; p is 1 (equal) or 0 (different)
};

/// Two-sided Welch unequal-variance t-test of mean(a) vs mean(b).
/// Each sample needs at least two values; throws SampleTooSmall.
[[nodiscard]] WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// I_x(a, b), the regularized incomplete beta function.
[[nodiscard]] double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
[[nodiscard]] double student_t_two_sided_p(double t, double df);

}  // namespace covacast
