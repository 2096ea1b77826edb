#pragma once

#include <string>

#include "lidlab/core/rng.hpp"
#include "lidlab/core/types.hpp"

namespace lidlab::diffusion {

/// Variance-preserving noise schedule with linear beta(t).
///
/// The forward process has transition kernel N(psi(t) x0, sigma^2(t) I) with
/// psi(t) = exp(-1/2 int_0^t beta) and sigma^2(t) = 1 - psi^2(t), so
/// psi^2 + sigma^2 = 1 for all t.
class Schedule {
 public:
  Schedule(double beta_min = 0.1, double beta_max = 20.0);

  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }

  double beta(double t) const;
  double beta_integral(double t) const;
  double psi(double t) const;
  double sigma(double t) const;
  double sigma2(double t) const;
  /// sigma(t) / psi(t), the noise scale of the mean-one reparameterization.
  double sigma_tilde(double t) const;

  /// Drift f(x, t) = -1/2 beta(t) x of the forward SDE.
  Vec drift(const Vec& x, double t) const;
  /// Diffusion coefficient g(t) = sqrt(beta(t)).
  double diffusion(double t) const;

  std::string id() const;

 private:
  double beta_min_;
  double beta_max_;
};

struct ScheduleValues {
  double psi;
  double sigma;
  double sigma_tilde;
};

/// Closed-form (psi, sigma, sigma_tilde) at t; throws for t outside [0, 1].
ScheduleValues schedule_eval(const Schedule& s, double t);

/// Draws x_t = psi(t) x + sigma(t) eps with eps ~ N(0, I); t must be in (0, 1].
Vec forward_perturb(const Vec& x, const Schedule& s, double t, Rng& rng);

} // namespace lidlab::diffusion
