#pragma once

#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::scorenet {

enum class TraceMode { exact, hutchinson };

/// tr(d s / d x) at (x, t, c). Exact mode sums the d canonical directional
/// derivatives; Hutchinson averages Rademacher quadratic forms v^T (ds/dx) v,
/// which is unbiased for the exact trace.
double score_divergence(const ScoreModel& model, const Vec& x, double t, const Vec& c,
                        TraceMode mode, int probes = 64, std::uint64_t seed = 0);

} // namespace lidlab::scorenet
