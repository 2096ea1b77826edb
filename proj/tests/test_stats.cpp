#include "doctest.h"

#include <vector>

#include "lidlab/core/rng.hpp"
#include "lidlab/core/stats.hpp"

using namespace lidlab;

// reference values from scipy.stats
TEST_CASE("chi-square cdf matches reference values") {
  CHECK(stats::chi_square_cdf(1e-4, 2) == doctest::Approx(4.999875002083312e-05).epsilon(1e-10));
  CHECK(stats::chi_square_cdf(3.5, 5) == doctest::Approx(0.3766123722504178).epsilon(1e-10));
  CHECK(stats::chi_square_cdf(100.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats::chi_square_cdf(0.0, 3) == 0.0);
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(stats::normal_quantile(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(stats::normal_quantile(0.3) == doctest::Approx(-0.5244005127080409).epsilon(1e-12));
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999}) {
    CHECK(stats::normal_cdf(stats::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS(stats::normal_quantile(0.0));
}

TEST_CASE("student t cdf matches reference values") {
  CHECK(stats::student_t_cdf(2.1, 19) == doctest::Approx(0.9753428008783632).epsilon(1e-12));
  CHECK(stats::student_t_cdf(-1.3, 4) == doctest::Approx(0.13172579823561206).epsilon(1e-12));
  CHECK(stats::student_t_cdf(0.0, 7) == doctest::Approx(0.5));
}

TEST_CASE("wilson interval matches reference bounds") {
  const auto iv = stats::wilson_interval(7, 50, 0.99);
  CHECK(iv.lo == doctest::Approx(0.05614371860633749).epsilon(1e-10));
  CHECK(iv.hi == doctest::Approx(0.30820578743035476).epsilon(1e-10));
  const auto zero = stats::wilson_interval(0, 100, 0.99);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  CHECK(zero.hi < 0.1);
}

TEST_CASE("pearson correlation and p-value match reference") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.5, 7.0};
  const std::vector<double> y{2.1, 3.9, 6.2, 8.0, 11.2, 13.9};
  const auto c = stats::pearson(x, y);
  CHECK(c.r == doctest::Approx(0.9995289187584383).epsilon(1e-12));
  CHECK(c.p_value == doctest::Approx(3.3282403363258417e-07).epsilon(1e-6));
}

TEST_CASE("paired t test matches reference") {
  const std::vector<double> a{3.1, 2.9, 3.4, 3.8, 2.5, 3.3, 3.6, 2.8};
  const std::vector<double> b{2.5, 2.7, 2.8, 3.1, 2.6, 2.9, 3.0, 2.7};
  const auto t = stats::paired_t_greater(a, b);
  CHECK(t.t_stat == doctest::Approx(3.7792033445318314).epsilon(1e-12));
  CHECK(t.p_one_sided == doctest::Approx(0.0034497257610789965).epsilon(1e-10));
}

TEST_CASE("auc handles separation, overlap and ties") {
  CHECK(stats::auc(std::vector<double>{3, 4, 5}, std::vector<double>{0, 1, 2}) == 1.0);
  CHECK(stats::auc(std::vector<double>{0, 1}, std::vector<double>{2, 3}) == 0.0);
  CHECK(stats::auc(std::vector<double>{1, 1}, std::vector<double>{1, 1}) == 0.5);
}

TEST_CASE("binomial helpers agree with direct formulas") {
  // 1 - (1-p)^n - n p (1-p)^(n-1)
  CHECK(stats::binomial_at_least_two(10, 0.05) ==
        doctest::Approx(1.0 - std::pow(0.95, 10) - 10 * 0.05 * std::pow(0.95, 9)).epsilon(1e-12));
  CHECK(stats::binomial_at_least_two(1, 0.5) == 0.0);
  CHECK(stats::at_least_one_hit(9, 0.05) == doctest::Approx(1.0 - std::pow(0.95, 9)));
}

TEST_CASE("rng streams are deterministic and forks are decorrelated") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(42);
  Rng f1 = c.fork(1), f2 = c.fork(2);
  CHECK(f1.uniform() != f2.uniform());

  // gaussian moments sanity
  Rng g(7);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = g.gaussian();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform_open_closed never returns the open endpoint") {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = r.uniform_open_closed(0.0, 1.0);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}
