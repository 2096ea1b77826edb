#include "lidlab/lid/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lidlab::lid {

std::string ThresholdRule::describe() const {
  std::ostringstream ss;
  switch (kind) {
    case Kind::per_matrix_percentile: ss << "percentile(" << value << ")"; break;
    case Kind::cohort_percentile: ss << "cohort_percentile(" << value << ")"; break;
    case Kind::absolute: ss << "absolute(" << value << ")"; break;
    case Kind::score_scale: ss << "score_scale(" << value << ")"; break;
  }
  return ss.str();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile: q outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

int count_above(const std::vector<double>& values, const ThresholdRule& rule,
                const std::vector<double>* pooled, double scale_hint) {
  double tau = 0.0;
  switch (rule.kind) {
    case ThresholdRule::Kind::per_matrix_percentile:
      tau = percentile(values, rule.value);
      break;
    case ThresholdRule::Kind::cohort_percentile:
      if (!pooled)
        throw std::invalid_argument("count_above: cohort rule needs pooled values");
      tau = percentile(*pooled, rule.value);
      break;
    case ThresholdRule::Kind::absolute:
      tau = rule.value;
      break;
    case ThresholdRule::Kind::score_scale:
      tau = rule.value * scale_hint;
      break;
  }
  return static_cast<int>(std::count_if(values.begin(), values.end(),
                                        [tau](double v) { return v > tau; }));
}

// --- FLIPD -----------------------------------------------------------------

namespace {

double guided_trace(const diffusion::GuidedScore& score, const Vec& x, double t,
                    scorenet::TraceMode mode, int probes, std::uint64_t seed) {
  const auto d = x.size();
  if (mode == scorenet::TraceMode::exact) {
    double trace = 0.0;
    Vec e = Vec::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      e[i] = 1.0;
      trace += score.dx(x, t, e)[i];
      e[i] = 0.0;
    }
    return trace;
  }
  if (probes < 1) throw std::invalid_argument("flipd: probes must be >= 1");
  Rng rng(seed);
  double acc = 0.0;
  for (int p = 0; p < probes; ++p) {
    const Vec v = rng.rademacher_vec(d);
    acc += v.dot(score.dx(x, t, v));
  }
  return acc / probes;
}

std::string cond_string(const std::optional<Vec>& cond, double lambda) {
  if (!cond) return "";
  std::ostringstream ss;
  ss << "lambda=" << lambda << ";c=";
  for (Eigen::Index i = 0; i < cond->size() && i < 8; ++i) {
    if (i) ss << ",";
    ss << (*cond)[i];
  }
  if (cond->size() > 8) ss << ",...";
  return ss.str();
}

} // namespace

LidEstimate flipd(const scorenet::ScoreModel& model, const Vec& x, const FlipdOptions& opt) {
  if (!(opt.t0 > 0.0 && opt.t0 <= 1.0))
    throw std::invalid_argument("flipd: t0 must lie in (0, 1]");
  std::optional<diffusion::GuidanceConfig> guidance;
  if (opt.cond) guidance = diffusion::GuidanceConfig{opt.lambda};
  const diffusion::GuidedScore score(model, opt.cond, guidance);
  const auto& sched = model.schedule();
  const double psi = sched.psi(opt.t0);
  const Vec xe = psi * x;

  LidEstimate est;
  est.estimator = Estimator::flipd;
  est.t0 = opt.t0;
  est.seed = opt.seed;
  est.cond = cond_string(opt.cond, opt.lambda);

  const int d = model.ambient_dim();
  const Vec s = score(xe, opt.t0);
  const double trace = guided_trace(score, xe, opt.t0, opt.trace, opt.probes, opt.seed);
  if (opt.reparam == FlipdOptions::Reparam::standard) {
    const double sig2 = sched.sigma2(opt.t0);
    est.value = d + sig2 * (trace + s.squaredNorm());
  } else {
    // same estimate written through s~ = psi s(psi x, t) and sigma~ = sigma/psi
    const double st = sched.sigma_tilde(opt.t0);
    const Vec s_tilde = psi * s;
    const double trace_tilde = psi * psi * trace;
    est.value = d + st * st * (trace_tilde + s_tilde.squaredNorm());
  }

  std::ostringstream cfg;
  cfg << "trace=" << (opt.trace == scorenet::TraceMode::exact ? "exact" : "hutchinson")
      << ";probes=" << opt.probes
      << ";reparam=" << (opt.reparam == FlipdOptions::Reparam::standard ? "standard" : "ddim");
  est.config = cfg.str();
  return est;
}

// --- normal bundle ----------------------------------------------------------

namespace {

std::vector<double> nb_singular_values(const scorenet::ScoreModel& model, const Vec& x,
                                       const NbOptions& opt, int k) {
  std::optional<diffusion::GuidanceConfig> guidance;
  if (opt.cond) guidance = diffusion::GuidanceConfig{opt.lambda};
  const diffusion::GuidedScore score(model, opt.cond, guidance);
  Rng rng(opt.seed);
  Mat S(model.ambient_dim(), k);
  for (int j = 0; j < k; ++j) {
    const Vec xt = diffusion::forward_perturb(x, model.schedule(), opt.t0, rng);
    S.col(j) = score(xt, opt.t0);
  }
  Eigen::JacobiSVD<Mat> svd(S);
  const Vec sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

} // namespace

LidEstimate nb_lid(const scorenet::ScoreModel& model, const Vec& x, const NbOptions& opt) {
  if (!(opt.t0 > 0.0 && opt.t0 <= 1.0))
    throw std::invalid_argument("nb_lid: t0 must lie in (0, 1]");
  const int d = model.ambient_dim();
  const int k = opt.k > 0 ? opt.k : 4 * d;
  if (k < 1) throw std::invalid_argument("nb_lid: k must be >= 1");
  if (opt.rule.kind == ThresholdRule::Kind::cohort_percentile)
    throw std::invalid_argument("nb_lid: cohort rule requires nb_lid_batch");

  const auto sv = nb_singular_values(model, x, opt, k);
  LidEstimate est;
  est.estimator = Estimator::nb;
  est.t0 = opt.t0;
  est.seed = opt.seed;
  est.cond = cond_string(opt.cond, opt.lambda);
  est.config = "k=" + std::to_string(k) + ";rule=" + opt.rule.describe();

  const double top = *std::max_element(sv.begin(), sv.end());
  if (top == 0.0) {
    est.value = d; // all-zero score matrix: rank 0
    est.degenerate = true;
    return est;
  }
  const double scale_hint = std::sqrt(static_cast<double>(k)) / model.schedule().sigma(opt.t0);
  const int rank = count_above(sv, opt.rule, nullptr, scale_hint);
  est.value = d - rank;
  return est;
}

std::vector<LidEstimate> nb_lid_batch(const scorenet::ScoreModel& model, const Batch& xs,
                                      const NbOptions& opt) {
  const int d = model.ambient_dim();
  const int k = opt.k > 0 ? opt.k : 4 * d;
  std::vector<std::vector<double>> spectra;
  spectra.reserve(xs.rows());
  std::vector<double> pooled;
  NbOptions per = opt;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    per.seed = Rng(opt.seed).fork(static_cast<std::uint64_t>(i)).raw();
    spectra.push_back(nb_singular_values(model, xs.row(i).transpose(), per, k));
    pooled.insert(pooled.end(), spectra.back().begin(), spectra.back().end());
  }
  const double scale_hint = std::sqrt(static_cast<double>(k)) / model.schedule().sigma(opt.t0);
  std::vector<LidEstimate> out;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    LidEstimate est;
    est.estimator = Estimator::nb;
    est.t0 = opt.t0;
    est.seed = Rng(opt.seed).fork(static_cast<std::uint64_t>(i)).raw();
    est.cond = cond_string(opt.cond, opt.lambda);
    est.config = "k=" + std::to_string(k) + ";rule=" + opt.rule.describe();
    const double top = *std::max_element(spectra[i].begin(), spectra[i].end());
    if (top == 0.0) {
      est.value = d;
      est.degenerate = true;
    } else {
      est.value = d - count_above(spectra[i], opt.rule, &pooled, scale_hint);
    }
    out.push_back(std::move(est));
  }
  return out;
}

// --- decoder Jacobian --------------------------------------------------------

namespace {

std::vector<double> jacobian_singular_values(const Generator& gen, const Vec& z) {
  if (z.size() != gen.latent_dim())
    throw std::invalid_argument("decoder_jacobian_lid: latent dimension mismatch");
  Mat J(gen.ambient_dim(), gen.latent_dim());
  Vec e = Vec::Zero(gen.latent_dim());
  for (int j = 0; j < gen.latent_dim(); ++j) {
    e[j] = 1.0;
    J.col(j) = gen.jvp(z, e);
    e[j] = 0.0;
  }
  if (!J.allFinite())
    throw std::invalid_argument("decoder_jacobian_lid: non-finite Jacobian entries");
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

} // namespace

LidEstimate decoder_jacobian_lid(const Generator& gen, const Vec& z, const JacobianOptions& opt,
                                 const std::vector<double>* pooled) {
  const auto sv = jacobian_singular_values(gen, z);
  LidEstimate est;
  est.estimator = Estimator::jacobian;
  est.config = "rule=" + opt.rule.describe();
  est.value = count_above(sv, opt.rule, pooled, 0.0);
  return est;
}

std::vector<LidEstimate> decoder_jacobian_lid_batch(const Generator& gen, const Batch& zs,
                                                    const JacobianOptions& opt) {
  std::vector<std::vector<double>> spectra;
  std::vector<double> pooled;
  for (Eigen::Index i = 0; i < zs.rows(); ++i) {
    spectra.push_back(jacobian_singular_values(gen, zs.row(i).transpose()));
    pooled.insert(pooled.end(), spectra.back().begin(), spectra.back().end());
  }
  std::vector<LidEstimate> out;
  for (auto& sv : spectra) {
    LidEstimate est;
    est.estimator = Estimator::jacobian;
    est.config = "rule=" + opt.rule.describe();
    est.value = count_above(sv, opt.rule, &pooled, 0.0);
    out.push_back(std::move(est));
  }
  return out;
}

// --- local PCA ---------------------------------------------------------------

LpcaContext::LpcaContext(Batch dataset, int k, double variance_percentile,
                         double distance_percentile)
    : data_(std::move(dataset)),
      k_(k),
      variance_percentile_(variance_percentile),
      distance_percentile_(distance_percentile) {
  const auto n = data_.rows();
  if (k_ < 1) throw std::invalid_argument("LpcaContext: k must be >= 1");
  if (n < k_ + 1)
    throw std::invalid_argument("LpcaContext: dataset needs at least k+1 rows (k=" +
                                std::to_string(k_) + ", rows=" + std::to_string(n) + ")");

  std::vector<double> pair_dists;
  pair_dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j)
      pair_dists.push_back((data_.row(i) - data_.row(j)).norm());
  }
  distance_threshold_ = percentile(std::move(pair_dists), distance_percentile_);

  // dataset-global explained-variance pool over every row's neighborhood
  std::vector<double> pool;
  pool.reserve(static_cast<std::size_t>(n) * data_.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    bool starved = false;
    const auto spec = neighborhood_spectrum(data_.row(i).transpose(), &starved);
    pool.insert(pool.end(), spec.begin(), spec.end());
  }
  variance_threshold_ = percentile(std::move(pool), variance_percentile_);
}

std::vector<double> LpcaContext::neighborhood_spectrum(const Vec& x, bool* starved) const {
  const auto n = data_.rows();
  const auto d = data_.cols();
  Vec dists(n);
  for (Eigen::Index i = 0; i < n; ++i) dists[i] = (data_.row(i).transpose() - x).norm();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::partial_sort(order.begin(), order.begin() + k_, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return dists[a] < dists[b] || (dists[a] == dists[b] && a < b);
                    });
  std::vector<Eigen::Index> hood(order.begin(), order.begin() + k_);

  // keep only close rows when any fall under the global distance threshold
  std::vector<Eigen::Index> close;
  for (auto idx : hood)
    if (dists[idx] <= distance_threshold_) close.push_back(idx);
  if (!close.empty()) hood = std::move(close);

  *starved = hood.size() < 2;
  if (*starved) return std::vector<double>(d, 0.0);

  Mat pts(hood.size(), d);
  for (std::size_t i = 0; i < hood.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = data_.row(hood[i]);
  const Eigen::RowVectorXd mean = pts.colwise().mean();
  const Mat centered = pts.rowwise() - mean;
  const Mat cov = centered.transpose() * centered / static_cast<double>(pts.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  const Vec ev = es.eigenvalues();
  std::vector<double> out(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, ev[i]);
  return out;
}

LidEstimate LpcaContext::estimate(const Vec& x) const {
  if (x.size() != data_.cols())
    throw std::invalid_argument("LpcaContext::estimate: dimension mismatch");
  bool starved = false;
  const auto spec = neighborhood_spectrum(x, &starved);
  LidEstimate est;
  est.estimator = Estimator::lpca;
  est.config = "k=" + std::to_string(k_) + ";variance_percentile=" +
               std::to_string(variance_percentile_) + ";distance_percentile=" +
               std::to_string(distance_percentile_);
  if (starved) {
    est.value = 0.0; // the duplication case
    est.degenerate = true;
    return est;
  }
  est.value = static_cast<double>(std::count_if(
      spec.begin(), spec.end(), [this](double v) { return v > variance_threshold_; }));
  return est;
}

LidEstimate lpca_lid(const Batch& dataset, const Vec& x, int k, double variance_percentile,
                     double distance_percentile) {
  return LpcaContext(dataset, k, variance_percentile, distance_percentile).estimate(x);
}

} // namespace lidlab::lid
