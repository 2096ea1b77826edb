#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lidlab/scorenet/divergence.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::mem {

enum class MetricKind { a_cfg, a_scfg, a_flipd };
std::string to_string(MetricKind kind);

/// Uniform scheduling support (t_lo, t_hi]; trajectory step times outside it
/// are visited but excluded from the metric mean.
struct Scheduling {
  double t_lo = 0.0;
  double t_hi = 1.0;
  bool contains(double t) const { return t > t_lo && t <= t_hi; }
};

struct MetricConfig {
  int n_trajectories = 4;
  int steps = 50;
  double lambda = 2.0;
  double t_min = 1e-3;
  Scheduling sched_cfg{0.0, 1.0};   // a_cfg and a_scfg
  Scheduling sched_flipd{0.0, 0.2}; // a_flipd concentrates near t = 0
  scorenet::TraceMode trace = scorenet::TraceMode::exact;
  int probes = 64;
};

struct StepTerm {
  int traj = 0;
  int step = 0;
  double t = 0.0;
  double term = 0.0;
  bool in_support = true;
};

struct MetricReport {
  MetricKind metric = MetricKind::a_cfg;
  double value = 0.0;
  int n_trajectories = 0;
  int steps = 0;
  double lambda = 1.0;
  Scheduling scheduling;
  std::vector<StepTerm> terms;            // n_trajectories * steps entries
  std::vector<double> cfg_vector_norms;   // |s~(c) - s~(null)| per visited step
  std::vector<double> cfg_adjusted_norms; // |s~_cfg| per visited step
};

/// All three metrics accumulated on shared trajectories, plus the mean trace
/// term over the FLIPD scheduling so the identity
/// a_flipd = d + a_scfg + mean_trace can be checked without re-sampling.
struct MetricBundle {
  MetricReport a_cfg;
  MetricReport a_scfg;
  MetricReport a_flipd;
  double mean_trace_term = 0.0; // over a_flipd's in-support steps
};

/// Runs n DDIM trajectories under classifier-free guidance and averages the
/// metric's per-step term over the scheduling support. The per-step terms are
/// expressed in the mean-one reparameterization: with x the physical point
/// psi(t) x~, sigma~^2 |s~|^2 equals sigma^2 |s(x, t)|^2, which is how they
/// are computed. With an empty conditioning vector every CFG vector is
/// identically zero.
MetricReport accumulate_metric(const scorenet::ScoreModel& model, const Vec& c,
                               MetricKind kind, const MetricConfig& cfg, std::uint64_t seed);

/// Shared-trajectory variant; `common_scheduling` overrides every metric's
/// support (used for the algebraic identity check).
MetricBundle accumulate_all(const scorenet::ScoreModel& model, const Vec& c,
                            const MetricConfig& cfg, std::uint64_t seed,
                            std::optional<Scheduling> common_scheduling = std::nullopt);

/// Gradient of the accumulated metric with respect to c. Trajectories are
/// frozen first; the gradient flows through the score evaluations along them.
Vec metric_gradient(const scorenet::ScoreModel& model, const Vec& c, MetricKind kind,
                    const MetricConfig& cfg, std::uint64_t seed, double* value_out = nullptr);

} // namespace lidlab::mem
