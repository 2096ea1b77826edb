#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lidlab/core/types.hpp"
#include "lidlab/lid/estimators.hpp"

namespace lidlab::mem {

struct CalibratedDistance {
  Eigen::Index nearest_train_idx = -1;
  double l2_distance = 0.0;
  double calibrated_ratio = 0.0;
  bool infinite_ratio = false; // duplicate neighborhood with a nonzero numerator
};

/// Distance to the nearest training row, divided by the mean distance from
/// that row to its own k nearest training neighbours (itself excluded).
CalibratedDistance calibrated_l2(const Vec& x, const Batch& trainset, int k);

enum class MemLabel { not_memorized, exact, near };
enum class MemType { none, od_mem, dd_mem, unresolved };

struct MemThresholds {
  double eps_exact = 1e-2;       // ambient norm on unit-scale data
  double tau_near = 1.0 / 3.0;   // calibrated-ratio cutoff
  double dd_cutoff = 1.0;        // "low" ground-truth LID
  double margin = 0.5;           // LID units separating od_mem from agreement
  int calib_k = 5;               // neighbours for the calibrated denominator

  void validate() const;
};

struct MemRecord {
  Vec sample;
  Eigen::Index nearest_train_idx = -1;
  double l2_distance = 0.0;
  double calibrated_ratio = 0.0;
  MemLabel label = MemLabel::not_memorized;
  lid::LidEstimate lid_model;
  std::optional<double> lid_gt;
  MemType mem_type = MemType::none;
};

std::string to_string(MemLabel label);
std::string to_string(MemType type);

/// Labels generated samples by distance (exact before near, so an exact hit
/// is memorized regardless of its ratio) and classifies memorized ones by
/// comparing model LID against the ground-truth oracle:
/// od_mem when lid_model < lid_gt - margin, dd_mem when the two agree and the
/// ground truth is genuinely low, unresolved without an oracle.
std::vector<MemRecord> label_and_classify(
    const Batch& generated, const Batch& trainset,
    const std::function<double(const Vec&)>* gt_oracle,
    const std::vector<lid::LidEstimate>& model_lids, const MemThresholds& thresholds);

} // namespace lidlab::mem
