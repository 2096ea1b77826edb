#include "lidlab/scorenet/divergence.hpp"

#include <stdexcept>

namespace lidlab::scorenet {

double score_divergence(const ScoreModel& model, const Vec& x, double t, const Vec& c,
                        TraceMode mode, int probes, std::uint64_t seed) {
  const int d = model.ambient_dim();
  if (mode == TraceMode::exact) {
    double trace = 0.0;
    Vec e = Vec::Zero(d);
    for (int i = 0; i < d; ++i) {
      e[i] = 1.0;
      trace += model.score_dx(x, t, c, e)[i];
      e[i] = 0.0;
    }
    return trace;
  }
  if (probes < 1) throw std::invalid_argument("score_divergence: probes must be >= 1");
  Rng rng(seed);
  double acc = 0.0;
  for (int p = 0; p < probes; ++p) {
    const Vec v = rng.rademacher_vec(d);
    acc += v.dot(model.score_dx(x, t, c, v));
  }
  return acc / probes;
}

} // namespace lidlab::scorenet
