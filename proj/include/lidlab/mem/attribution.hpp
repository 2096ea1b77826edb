#pragma once

#include <functional>
#include <vector>

#include "lidlab/mem/metrics.hpp"

namespace lidlab::mem {

struct AttributionResult {
  std::vector<double> weights; // nonnegative, sum to 1
  bool degenerate = false;     // all-zero gradient fell back to uniform
  Vec gradient;
  double metric_value = 0.0;
};

/// Splits the conditioning vector into consecutive components of the given
/// sizes and scores each by the l2 norm of its slice of the metric gradient,
/// normalized across components.
AttributionResult token_attribution(const scorenet::ScoreModel& model, const Vec& c,
                                    const std::vector<int>& slice_sizes, MetricKind kind,
                                    const MetricConfig& cfg, std::uint64_t seed);

enum class MitigationStrategy { attribution, random };

/// Draws a fresh embedding slice for a replaced component; the default is a
/// standard normal, matching the conditioning prior of the toy datasets.
using SlicePrior = std::function<Vec(int component, int size, Rng& rng)>;
SlicePrior standard_normal_prior();

/// Resamples k components of c (chosen by attribution weight or uniformly,
/// without replacement) from the conditioning prior; unselected components
/// are left untouched.
Vec mitigate_prompt(const scorenet::ScoreModel& model, const Vec& c,
                    const std::vector<int>& slice_sizes, MetricKind kind,
                    const MetricConfig& cfg, int k, MitigationStrategy strategy,
                    std::uint64_t seed, const SlicePrior& prior = standard_normal_prior());

struct OptimizationStep {
  Vec c;
  double value = 0.0;
};

/// Adam ascent on the metric as a function of c; the trajectory noise is held
/// fixed across iterations so the objective is deterministic given the seed.
std::vector<OptimizationStep> optimize_conditioning(const scorenet::ScoreModel& model,
                                                    const Vec& c0, MetricKind kind,
                                                    const MetricConfig& cfg, int steps,
                                                    double lr, std::uint64_t seed);

} // namespace lidlab::mem
