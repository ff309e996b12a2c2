#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "covacast/error.hpp"
#include "covacast/random.hpp"
#include "covacast/stats.hpp"
#include "support.hpp"

using namespace covacast;

namespace {

// Reference Welch test built on Boost's Student-t distribution.
struct Reference {
  double t;
  double df;
  double p;
};

Reference reference_welch(const std::vector<double>& a, const std::vector<double>& b) {
  const auto mv = [](const std::vector<double>& x) {
    double m = 0.0;
    for (const double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (const double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = mv(a);
  const auto [mb, vb] = mv(b);
  const double qa = va / static_cast<double>(a.size());
  const double qb = vb / static_cast<double>(b.size());
  const double t = (ma - mb) / std::sqrt(qa + qb);
  const double df = (qa + qb) * (qa + qb) /
                    (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(df);
  return {t, df, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)))};
}

std::vector<double> sample(std::mt19937_64& rng, double shift) {
  std::vector<double> x(2 + rng() % 40);
  const double sd = 0.1 + uniform_unit(rng) * 10.0;
  for (auto& v : x) v = shift + sd * standard_normal(rng);
  return x;
}

}  // namespace

TEST_CASE("fixture A=[1,2,3], B=[2,3,4]") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{2, 3, 4};
  const WelchResult r = welch_t_test(a, b);
  const Reference ref = reference_welch(a, b);
  CHECK(r.t == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(ref.t).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(ref.df).epsilon(1e-12));
  CHECK(r.p_two_sided == doctest::Approx(ref.p).epsilon(1e-10));
  // Exact two-sided value for t = -sqrt(1.5) at 4 df; the 0.289 quoted as a
  // rounded target differs in the third decimal.
  CHECK(r.p_two_sided == doctest::Approx(0.2878641347266908).epsilon(1e-10));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("degenerate and invalid samples") {
  const std::vector<double> same{5, 5, 5};
  const WelchResult eq = welch_t_test(same, same);
  CHECK(eq.degenerate);
  CHECK(eq.p_two_sided == 1.0);
  CHECK(eq.t == 0.0);
  const WelchResult diff = welch_t_test(same, std::vector<double>{6, 6});
  CHECK(diff.degenerate);
  CHECK(diff.p_two_sided == 0.0);

  const WelchResult ident = welch_t_test(std::vector<double>{1, 4, 2}, std::vector<double>{1, 4, 2});
  CHECK(ident.t == 0.0);
  CHECK(ident.p_two_sided == doctest::Approx(1.0));

  // One constant side is not degenerate: the other side still has variance.
  const WelchResult one = welch_t_test(same, std::vector<double>{4, 6, 8});
  CHECK_FALSE(one.degenerate);
  CHECK(one.t == doctest::Approx(reference_welch({5, 5, 5}, {4, 6, 8}).t));

  try {
    (void)welch_t_test(std::vector<double>{1}, std::vector<double>{1, 2});
    FAIL("expected SampleTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SampleTooSmall);
  }
}

TEST_CASE("special functions against Boost") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double a = 0.05 + uniform_unit(rng) * 60.0;
    const double b = 0.05 + uniform_unit(rng) * 60.0;
    const double x = uniform_unit(rng);
    CHECK(regularized_incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-9));
  }
  CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK(student_t_two_sided_p(0.0, 7.0) == doctest::Approx(1.0));
}

TEST_CASE("property: agreement with the reference, symmetry, p in [0,1]") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> a = sample(rng, 0.0);
    const std::vector<double> b = sample(rng, uniform_unit(rng) * 6.0 - 3.0);
    const WelchResult ab = welch_t_test(a, b);
    const WelchResult ba = welch_t_test(b, a);
    CHECK(ab.p_two_sided >= 0.0);
    CHECK(ab.p_two_sided <= 1.0);
    CHECK(ba.t == -ab.t);
    CHECK(ba.df == ab.df);
    CHECK(ba.p_two_sided == ab.p_two_sided);
    if (i % 10 == 0) {
      const Reference ref = reference_welch(a, b);
      CHECK(testsupport::rel_close(ab.t, ref.t, 1e-9));
      CHECK(testsupport::rel_close(ab.df, ref.df, 1e-9));
      CHECK(std::fabs(ab.p_two_sided - ref.p) <= 1e-9);
    }
  }
}

TEST_CASE("property: p decreases as |t| grows") {
  for (const double df : {1.0, 2.5, 4.0, 10.0, 37.3, 98.0, 1000.0}) {
    double prev = 1.0;
    for (int k = 0; k <= 400; ++k) {
      const double t = k * 0.05;
      const double p = student_t_two_sided_p(t, df);
      CHECK(p <= prev);
      CHECK(p == doctest::Approx(student_t_two_sided_p(-t, df)));
      prev = p;
    }
  }
}
