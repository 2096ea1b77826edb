#include "lidlab/mem/attribution.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lidlab::mem {

namespace {

void check_slices(const std::vector<int>& slice_sizes, Eigen::Index cond_dim) {
  if (slice_sizes.empty())
    throw std::invalid_argument("token components: need at least one slice");
  int total = 0;
  for (int s : slice_sizes) {
    if (s <= 0) throw std::invalid_argument("token components: slice sizes must be positive");
    total += s;
  }
  if (total != cond_dim)
    throw std::invalid_argument("token components: slice sizes sum to " + std::to_string(total) +
                                ", conditioning has dimension " + std::to_string(cond_dim));
}

} // namespace

AttributionResult token_attribution(const scorenet::ScoreModel& model, const Vec& c,
                                    const std::vector<int>& slice_sizes, MetricKind kind,
                                    const MetricConfig& cfg, std::uint64_t seed) {
  check_slices(slice_sizes, c.size());
  AttributionResult out;
  out.gradient = metric_gradient(model, c, kind, cfg, seed, &out.metric_value);

  const auto m = slice_sizes.size();
  out.weights.resize(m);
  int at = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    out.weights[j] = out.gradient.segment(at, slice_sizes[j]).norm();
    total += out.weights[j];
    at += slice_sizes[j];
  }
  if (total == 0.0) {
    out.degenerate = true;
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(m));
  } else {
    for (auto& w : out.weights) w /= total;
  }
  return out;
}

SlicePrior standard_normal_prior() {
  return [](int, int size, Rng& rng) { return rng.gaussian_vec(size); };
}

Vec mitigate_prompt(const scorenet::ScoreModel& model, const Vec& c,
                    const std::vector<int>& slice_sizes, MetricKind kind,
                    const MetricConfig& cfg, int k, MitigationStrategy strategy,
                    std::uint64_t seed, const SlicePrior& prior) {
  check_slices(slice_sizes, c.size());
  const int m = static_cast<int>(slice_sizes.size());
  if (k < 0 || k > m)
    throw std::invalid_argument("mitigate_prompt: k must lie in [0, components]");
  if (k == 0) return c;

  Rng rng(seed);
  std::vector<double> weights;
  if (strategy == MitigationStrategy::attribution) {
    weights = token_attribution(model, c, slice_sizes, kind, cfg, rng.fork(1).raw()).weights;
  } else {
    weights.assign(m, 1.0 / m);
  }

  // k draws without replacement from the categorical
  std::vector<int> chosen;
  std::vector<double> w = weights;
  for (int draw = 0; draw < k; ++draw) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double u = rng.uniform() * total;
    int pick = -1;
    for (int j = 0; j < m; ++j) {
      if (w[j] <= 0.0) continue;
      u -= w[j];
      pick = j;
      if (u < 0.0) break;
    }
    chosen.push_back(pick);
    w[pick] = 0.0;
  }

  std::vector<int> offsets(m);
  int at = 0;
  for (int j = 0; j < m; ++j) {
    offsets[j] = at;
    at += slice_sizes[j];
  }
  Vec perturbed = c;
  for (int j : chosen)
    perturbed.segment(offsets[j], slice_sizes[j]) = prior(j, slice_sizes[j], rng);
  return perturbed;
}

std::vector<OptimizationStep> optimize_conditioning(const scorenet::ScoreModel& model,
                                                    const Vec& c0, MetricKind kind,
                                                    const MetricConfig& cfg, int steps,
                                                    double lr, std::uint64_t seed) {
  if (steps < 0) throw std::invalid_argument("optimize_conditioning: steps must be >= 0");
  if (lr < 0.0) throw std::invalid_argument("optimize_conditioning: lr must be >= 0");

  std::vector<OptimizationStep> trace;
  Vec c = c0;
  Vec m = Vec::Zero(c.size());
  Vec v = Vec::Zero(c.size());
  static constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  double value = 0.0;
  Vec g = metric_gradient(model, c, kind, cfg, seed, &value);
  trace.push_back({c, value});
  for (int step = 1; step <= steps; ++step) {
    if (!g.allFinite())
      throw std::runtime_error("optimize_conditioning: non-finite gradient at step " +
                               std::to_string(step));
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, step);
    const double c2 = 1.0 - std::pow(b2, step);
    // ascent
    c.array() += lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    g = metric_gradient(model, c, kind, cfg, seed, &value);
    trace.push_back({c, value});
  }
  return trace;
}

} // namespace lidlab::mem
