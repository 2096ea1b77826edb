#include "lidlab/mem/copycheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "lidlab/core/rng.hpp"
#include "lidlab/core/stats.hpp"

namespace lidlab::mem {

namespace {

// sorted distances from x0 let each radius be answered by binary search
std::vector<double> sorted_distances(const Batch& pts, const Vec& x0) {
  std::vector<double> d(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    d[static_cast<std::size_t>(i)] = (pts.row(i).transpose() - x0).norm();
  std::sort(d.begin(), d.end());
  return d;
}

std::int64_t count_within(const std::vector<double>& sorted, double r) {
  return std::upper_bound(sorted.begin(), sorted.end(), r) - sorted.begin();
}

} // namespace

CopyVerdict copy_check(const Sampler& model_sampler, const Sampler& gt_sampler, const Vec& x0,
                       double lambda, double gamma, const std::vector<double>& radii, int n_mc,
                       double confidence, std::uint64_t seed) {
  if (!(lambda > 1.0)) throw std::invalid_argument("copy_check: lambda must exceed 1");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("copy_check: gamma must lie in (0, 1)");
  if (radii.empty()) throw std::invalid_argument("copy_check: empty radius grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i && radii[i] <= radii[i - 1]))
      throw std::invalid_argument("copy_check: radii must be positive and increasing");
  }
  if (n_mc < 1000) throw std::invalid_argument("copy_check: n_mc must be >= 1000");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("copy_check: confidence must lie in (0, 1)");

  Rng rng(seed);
  const auto model_pts = model_sampler(n_mc, rng.fork(1).raw());
  const auto gt_pts = gt_sampler(n_mc, rng.fork(2).raw());
  const auto model_d = sorted_distances(model_pts, x0);
  const auto gt_d = sorted_distances(gt_pts, x0);

  CopyVerdict verdict;
  verdict.x0 = x0;
  verdict.lambda = lambda;
  verdict.gamma = gamma;
  verdict.n_mc = n_mc;
  verdict.confidence = confidence;

  for (double r : radii) {
    RadiusRow row;
    row.radius = r;
    const auto cm = count_within(model_d, r);
    const auto cg = count_within(gt_d, r);
    row.p_model = static_cast<double>(cm) / n_mc;
    row.p_gt = static_cast<double>(cg) / n_mc;
    const auto im = stats::wilson_interval(cm, n_mc, confidence);
    const auto ig = stats::wilson_interval(cg, n_mc, confidence);
    row.model_lo = im.lo;
    row.model_hi = im.hi;
    row.gt_lo = ig.lo;
    row.gt_hi = ig.hi;
    row.flagged = (row.model_lo >= lambda * row.gt_hi) && (row.gt_hi <= gamma);
    if (row.flagged && !verdict.flagged) {
      verdict.flagged = true;
      verdict.witness_radius = r;
    }
    verdict.rows.push_back(row);
  }
  return verdict;
}

std::vector<double> geometric_radii(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2)
    throw std::invalid_argument("geometric_radii: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double ratio = std::pow(hi / lo, 1.0 / (count - 1));
  double r = lo;
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = r;
    r *= ratio;
  }
  out.back() = hi;
  return out;
}

std::string CopyVerdict::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  j["gamma"] = gamma;
  j["n_mc"] = n_mc;
  j["confidence"] = confidence;
  j["flagged"] = flagged;
  if (witness_radius) j["witness_radius"] = *witness_radius;
  auto x0j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0j.push_back(x0[i]);
  j["x0"] = x0j;
  auto rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    rows_json.push_back({{"radius", row.radius},
                         {"p_model", row.p_model},
                         {"p_gt", row.p_gt},
                         {"model_ci", {row.model_lo, row.model_hi}},
                         {"gt_ci", {row.gt_lo, row.gt_hi}},
                         {"flagged", row.flagged}});
  }
  j["radii"] = rows_json;
  return j.dump(2);
}

} // namespace lidlab::mem
