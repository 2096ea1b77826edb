#pragma once

#include <optional>

#include "lidlab/lid/estimators.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::mem {

enum class DetectMethod { cfg_norm, flipd, flipd_cond };

struct DetectOptions {
  int k_euler = 3;
  double t0 = 0.01;
  scorenet::TraceMode trace = scorenet::TraceMode::exact;
  int probes = 64;
  double lambda = 1.0;
  std::uint64_t seed = 0;
};

/// Memorization score for a candidate training point; higher always means
/// more memorized (FLIPD variants are negated internally).
///
/// cfg_norm integrates the probability-flow ODE forward from x with the
/// conditional score for k_euler Euler steps up to t0, then reports the CFG
/// vector norm with both scores evaluated at the endpoint. k_euler = 0 scores
/// x directly at t0.
double detect_training_point(const scorenet::ScoreModel& model, const Vec& x,
                             const std::optional<Vec>& c, DetectMethod method,
                             const DetectOptions& opt);

std::string to_string(DetectMethod method);

} // namespace lidlab::mem
