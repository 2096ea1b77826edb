#include "lidlab/mem/detect.hpp"

#include <stdexcept>

namespace lidlab::mem {

std::string to_string(DetectMethod method) {
  switch (method) {
    case DetectMethod::cfg_norm: return "cfg_norm";
    case DetectMethod::flipd: return "flipd";
    case DetectMethod::flipd_cond: return "flipd_cond";
  }
  return "?";
}

double detect_training_point(const scorenet::ScoreModel& model, const Vec& x,
                             const std::optional<Vec>& c, DetectMethod method,
                             const DetectOptions& opt) {
  if (!(opt.t0 > 0.0 && opt.t0 <= 1.0))
    throw std::invalid_argument("detect_training_point: t0 must lie in (0, 1]");
  const bool needs_cond = method != DetectMethod::flipd;
  if (needs_cond && (!c || c->size() == 0))
    throw std::invalid_argument("detect_training_point: method " + to_string(method) +
                                " requires a conditioning vector");

  if (method == DetectMethod::flipd || method == DetectMethod::flipd_cond) {
    lid::FlipdOptions fopt;
    fopt.t0 = opt.t0;
    fopt.trace = opt.trace;
    fopt.probes = opt.probes;
    fopt.seed = opt.seed;
    fopt.lambda = opt.lambda;
    if (method == DetectMethod::flipd_cond) fopt.cond = *c;
    // low LID signals memorization; negate so higher = more memorized
    return -lid::flipd(model, x, fopt).value;
  }

  if (opt.k_euler < 0)
    throw std::invalid_argument("detect_training_point: k_euler must be >= 0");
  const auto& sched = model.schedule();
  Vec cur = x;
  // probability-flow ODE forward in time, conditional score, Euler on a
  // uniform grid ending at t0
  for (int j = 1; j <= opt.k_euler; ++j) {
    const double t = opt.t0 * static_cast<double>(j) / opt.k_euler;
    const double dt = opt.t0 / opt.k_euler;
    const Vec s = model.score(cur, t, *c);
    cur += dt * (sched.drift(cur, t) - 0.5 * sched.beta(t) * s);
  }
  const Vec s_cond = model.score(cur, opt.t0, *c);
  const Vec s_null = model.score(cur, opt.t0, Vec());
  return (s_cond - s_null).norm();
}

} // namespace lidlab::mem
