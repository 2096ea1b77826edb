#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lidlab::stats {

/// Regularized lower incomplete gamma P(a, x).
double reg_gamma_p(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double reg_beta(double a, double b, double x);

double chi_square_cdf(double x, double dof);
double normal_cdf(double z);
/// Inverse of normal_cdf, accurate to ~1e-15 after refinement.
double normal_quantile(double p);
/// P(T <= t) for Student's t with dof degrees of freedom.
double student_t_cdf(double t, double dof);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion at two-sided `confidence`.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence);

/// Area under the ROC curve for positives vs negatives (ties get half credit).
/// Higher scores are treated as "more positive".
double auc(std::span<const double> positives, std::span<const double> negatives);

struct Correlation {
  double r = 0.0;
  double p_value = 1.0; // two-sided, t approximation
  std::size_t n = 0;
};
Correlation pearson(std::span<const double> xs, std::span<const double> ys);

struct PairedTest {
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double p_one_sided = 1.0; // H1: mean(a - b) > 0
  std::size_t n = 0;
};
PairedTest paired_t_greater(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> xs);
double sample_std(std::span<const double> xs);

/// P(Binomial(n, p) >= 2), summed term by term.
double binomial_at_least_two(int n, double p);
/// 1 - (1-p)^n, probability that n independent draws hit an atom of mass p.
double at_least_one_hit(int n, double p);

} // namespace lidlab::stats
