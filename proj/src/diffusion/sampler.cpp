#include "lidlab/diffusion/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace lidlab::diffusion {

SampleRun sample_reverse(const scorenet::ScoreModel& model, int n, const SampleOptions& opt,
                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_reverse: n must be >= 1");
  if (opt.steps < 1) throw std::invalid_argument("sample_reverse: steps must be >= 1");
  if (!(opt.t_min > 0.0 && opt.t_min < 1.0))
    throw std::invalid_argument("sample_reverse: t_min must lie in (0, 1)");
  if (opt.guidance && !opt.cond)
    throw std::invalid_argument("sample_reverse: guidance given without conditioning");

  const GuidedScore score(model, opt.cond, opt.guidance);
  const Schedule& sched = model.schedule();
  const int d = model.ambient_dim();

  std::vector<double> grid(opt.steps + 1);
  for (int k = 0; k <= opt.steps; ++k)
    grid[k] = 1.0 - (1.0 - opt.t_min) * static_cast<double>(k) / opt.steps;

  SampleRun run;
  run.samples.resize(n, d);
  if (opt.record_trajectory) run.trajectories.resize(n);

  const Rng base(seed);
  for (int chain = 0; chain < n; ++chain) {
    Rng rng = base.fork(static_cast<std::uint64_t>(chain));
    Vec z = rng.gaussian_vec(d);
    Mat* traj = nullptr;
    if (opt.record_trajectory) {
      run.trajectories[chain].resize(opt.steps + 1, 1 + d);
      traj = &run.trajectories[chain];
    }

    if (opt.kind == SamplerKind::ddim) {
      // state lives in x~ = x / psi coordinates; p_1 of x is ~N(0, I)
      Vec xt = z / sched.psi(1.0);
      for (int k = 0; k < opt.steps; ++k) {
        const double t = grid[k];
        const double dt = grid[k] - grid[k + 1];
        if (traj) traj->row(k) << t, (sched.psi(t) * xt).transpose();
        // dx~/dt = -1/2 g~^2 s~ with g~^2 = beta/psi^2 and s~ = psi s(psi x, t)
        const Vec s = score(sched.psi(t) * xt, t);
        xt += dt * 0.5 * (sched.beta(t) / sched.psi(t)) * s;
      }
      if (traj) traj->row(opt.steps) << grid[opt.steps],
          (sched.psi(grid[opt.steps]) * xt).transpose();
      run.samples.row(chain) = (sched.psi(grid[opt.steps]) * xt).transpose();
      continue;
    }

    Vec x = z;
    for (int k = 0; k < opt.steps; ++k) {
      const double t = grid[k];
      const double dt = grid[k] - grid[k + 1];
      if (traj) traj->row(k) << t, x.transpose();
      const Vec s = score(x, t);
      const double g2 = sched.beta(t);
      if (opt.kind == SamplerKind::ode) {
        x -= dt * (sched.drift(x, t) - 0.5 * g2 * s);
      } else {
        x -= dt * (sched.drift(x, t) - g2 * s);
        x += std::sqrt(dt) * sched.diffusion(t) * rng.gaussian_vec(d);
      }
    }
    if (traj) traj->row(opt.steps) << grid[opt.steps], x.transpose();
    run.samples.row(chain) = x.transpose();
  }
  return run;
}

} // namespace lidlab::diffusion
