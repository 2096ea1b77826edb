#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lidlab/core/types.hpp"

namespace lidlab::mem {

using Sampler = std::function<Batch(int n, std::uint64_t seed)>;

struct RadiusRow {
  double radius = 0.0;
  double p_model = 0.0;
  double p_gt = 0.0;
  double model_lo = 0.0, model_hi = 0.0; // Wilson bounds
  double gt_lo = 0.0, gt_hi = 0.0;
  bool flagged = false;
};

/// Monte-Carlo test of the (lambda, gamma)-copy definition on a radius grid.
/// A radius flags when the interval-separated inequalities
///   lower(P_model) >= lambda * upper(P_gt)  and  upper(P_gt) <= gamma
/// hold simultaneously at the stated confidence; the verdict flags when any
/// radius does.
struct CopyVerdict {
  Vec x0;
  double lambda = 2.0;
  double gamma = 0.1;
  int n_mc = 0;
  double confidence = 0.99;
  std::vector<RadiusRow> rows;
  bool flagged = false;
  std::optional<double> witness_radius;

  std::string to_json() const;
};

CopyVerdict copy_check(const Sampler& model_sampler, const Sampler& gt_sampler, const Vec& x0,
                       double lambda, double gamma, const std::vector<double>& radii, int n_mc,
                       double confidence, std::uint64_t seed);

/// Geometric radius grid, a convenience for the common sweep.
std::vector<double> geometric_radii(double lo, double hi, int count);

} // namespace lidlab::mem
