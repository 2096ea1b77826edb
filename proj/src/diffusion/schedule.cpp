#include "lidlab/diffusion/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lidlab::diffusion {

Schedule::Schedule(double beta_min, double beta_max)
    : beta_min_(beta_min), beta_max_(beta_max) {
  if (!(beta_min > 0.0) || !(beta_max >= beta_min))
    throw std::invalid_argument("Schedule: need 0 < beta_min <= beta_max");
}

double Schedule::beta(double t) const { return beta_min_ + (beta_max_ - beta_min_) * t; }

double Schedule::beta_integral(double t) const {
  return beta_min_ * t + 0.5 * (beta_max_ - beta_min_) * t * t;
}

double Schedule::psi(double t) const { return std::exp(-0.5 * beta_integral(t)); }

double Schedule::sigma2(double t) const {
  // 1 - exp(-B(t)) computed without cancellation for small t
  return -std::expm1(-beta_integral(t));
}

double Schedule::sigma(double t) const { return std::sqrt(sigma2(t)); }

double Schedule::sigma_tilde(double t) const { return sigma(t) / psi(t); }

Vec Schedule::drift(const Vec& x, double t) const { return -0.5 * beta(t) * x; }

double Schedule::diffusion(double t) const { return std::sqrt(beta(t)); }

std::string Schedule::id() const {
  std::ostringstream ss;
  ss << "vp(" << beta_min_ << "," << beta_max_ << ")";
  return ss.str();
}

ScheduleValues schedule_eval(const Schedule& s, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("schedule_eval: t must lie in [0, 1]");
  return {s.psi(t), s.sigma(t), s.sigma_tilde(t)};
}

Vec forward_perturb(const Vec& x, const Schedule& s, double t, Rng& rng) {
  if (!(t > 0.0 && t <= 1.0))
    throw std::invalid_argument("forward_perturb: t must lie in (0, 1]");
  return s.psi(t) * x + s.sigma(t) * rng.gaussian_vec(x.size());
}

} // namespace lidlab::diffusion
