#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lidlab/diffusion/guidance.hpp"
#include "lidlab/diffusion/schedule.hpp"
#include "lidlab/scorenet/divergence.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::lid {

enum class Estimator { flipd, nb, lpca, jacobian };

struct LidEstimate {
  double value = 0.0;
  Estimator estimator = Estimator::flipd;
  double t0 = std::numeric_limits<double>::quiet_NaN();
  std::string cond;   // empty = unconditional
  std::string config; // parameter snapshot
  std::uint64_t seed = 0;
  bool degenerate = false; // e.g. all-zero score matrix, starved neighborhood
};

/// Numerical-rank threshold for singular values / explained variances.
///
/// per_matrix_percentile: percentile of the values being thresholded (the
///   default, with q = 10).
/// cohort_percentile: percentile over a pooled cohort; batch estimators
///   compute the pool, point estimators need `pooled` filled in.
/// absolute: a fixed cutoff.
/// score_scale: NB-specific cutoff factor * sqrt(k) / sigma(t0), keyed to the
///   1/sigma blow-up of scores along normal directions.
struct ThresholdRule {
  enum class Kind { per_matrix_percentile, cohort_percentile, absolute, score_scale };
  Kind kind = Kind::per_matrix_percentile;
  double value = 10.0;

  static ThresholdRule percentile(double q) { return {Kind::per_matrix_percentile, q}; }
  static ThresholdRule cohort(double q) { return {Kind::cohort_percentile, q}; }
  static ThresholdRule absolute(double tau) { return {Kind::absolute, tau}; }
  static ThresholdRule score_scale(double factor) { return {Kind::score_scale, factor}; }
  std::string describe() const;
};

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Count of entries strictly above the rule's threshold.
int count_above(const std::vector<double>& values, const ThresholdRule& rule,
                const std::vector<double>* pooled = nullptr, double scale_hint = 0.0);

struct FlipdOptions {
  double t0 = 0.05;
  scorenet::TraceMode trace = scorenet::TraceMode::exact;
  int probes = 64;
  std::uint64_t seed = 0;
  std::optional<Vec> cond;
  double lambda = 1.0; // guidance strength when cond is present
  enum class Reparam { standard, ddim } reparam = Reparam::standard;
};

/// FLIPD(x, t0) = d + sigma^2(t0) (tr grad s(psi x, t0) + |s(psi x, t0)|^2).
/// The ddim reparameterization evaluates the same quantity through
/// s~ = psi s(psi x, t) and sigma~; the two routes agree analytically.
/// With cond set, the guided score replaces s throughout. Values may be
/// negative and are reported as-is.
LidEstimate flipd(const scorenet::ScoreModel& model, const Vec& x, const FlipdOptions& opt);

struct NbOptions {
  double t0 = 0.1;
  int k = 0; // 0 means the recommended 4 * d
  ThresholdRule rule = ThresholdRule::percentile(10.0);
  std::uint64_t seed = 0;
  std::optional<Vec> cond;
  double lambda = 1.0;
};

/// Normal-bundle estimate d - rank of the d x k matrix of scores at k forward
/// perturbations of x; normal directions carry singular values that grow like
/// 1/sigma(t0) while tangent ones stay O(1).
LidEstimate nb_lid(const scorenet::ScoreModel& model, const Vec& x, const NbOptions& opt);
/// Batch variant; cohort_percentile rules pool singular values across points.
std::vector<LidEstimate> nb_lid_batch(const scorenet::ScoreModel& model, const Batch& xs,
                                      const NbOptions& opt);

/// Differentiable map from latent to ambient space, the generator of a
/// decoder-based model.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual int latent_dim() const = 0;
  virtual int ambient_dim() const = 0;
  virtual Vec apply(const Vec& z) const = 0;
  /// Directional derivative (d G / d z) v.
  virtual Vec jvp(const Vec& z, const Vec& v) const = 0;
};

struct JacobianOptions {
  ThresholdRule rule = ThresholdRule::cohort(10.0);
};

/// Count of Jacobian singular values above threshold at z.
LidEstimate decoder_jacobian_lid(const Generator& gen, const Vec& z, const JacobianOptions& opt,
                                 const std::vector<double>* pooled = nullptr);
std::vector<LidEstimate> decoder_jacobian_lid_batch(const Generator& gen, const Batch& zs,
                                                    const JacobianOptions& opt);

/// Local PCA with a dataset-global explained-variance threshold (percentile
/// over every row's neighborhood spectrum) and neighborhoods restricted to
/// rows closer than the given percentile of all pairwise distances.
class LpcaContext {
 public:
  LpcaContext(Batch dataset, int k, double variance_percentile = 10.0,
              double distance_percentile = 10.0);

  LidEstimate estimate(const Vec& x) const;
  double variance_threshold() const { return variance_threshold_; }
  double distance_threshold() const { return distance_threshold_; }
  int k() const { return k_; }

 private:
  std::vector<double> neighborhood_spectrum(const Vec& x, bool* starved) const;

  Batch data_;
  int k_;
  double variance_percentile_;
  double distance_percentile_;
  double distance_threshold_ = 0.0;
  double variance_threshold_ = 0.0;
};

LidEstimate lpca_lid(const Batch& dataset, const Vec& x, int k,
                     double variance_percentile = 10.0, double distance_percentile = 10.0);

} // namespace lidlab::lid
