#pragma once

#include <optional>
#include <vector>

#include "lidlab/diffusion/guidance.hpp"
#include "lidlab/diffusion/schedule.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::diffusion {

enum class SamplerKind { sde, ode, ddim };

struct SampleOptions {
  int steps = 50;
  SamplerKind kind = SamplerKind::ddim;
  double t_min = 1e-3;
  std::optional<Vec> cond;
  std::optional<GuidanceConfig> guidance;
  bool record_trajectory = false;
};

struct SampleRun {
  Batch samples; // n x d
  // One (steps+1) x (1+d) matrix per chain when recording: columns (t, x).
  std::vector<Mat> trajectories;
};

/// Integrates n reverse chains from t = 1 noise down to t_min on a uniform
/// grid. sde is Euler-Maruyama on the reverse SDE, ode is Euler on the
/// probability-flow ODE, and ddim is Euler on the mean-one reparameterization
/// x~ = x / psi with score s~(x,t) = psi(t) s(psi(t) x, t). Chains are seeded
/// independently, so results do not depend on evaluation order.
SampleRun sample_reverse(const scorenet::ScoreModel& model, int n, const SampleOptions& opt,
                         std::uint64_t seed);

} // namespace lidlab::diffusion
