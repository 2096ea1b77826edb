#include "lidlab/mem/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lidlab::mem {

CalibratedDistance calibrated_l2(const Vec& x, const Batch& trainset, int k) {
  const auto n = trainset.rows();
  if (k < 1) throw std::invalid_argument("calibrated_l2: k must be >= 1");
  if (n < k + 1)
    throw std::invalid_argument("calibrated_l2: trainset needs at least k+1 rows (k=" +
                                std::to_string(k) + ", rows=" + std::to_string(n) + ")");
  if (x.size() != trainset.cols())
    throw std::invalid_argument("calibrated_l2: dimension mismatch");

  CalibratedDistance out;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = (trainset.row(i).transpose() - x).norm();
    if (d < best) {
      best = d;
      out.nearest_train_idx = i;
    }
  }
  out.l2_distance = best;

  // local concentration at the retrieved training point
  std::vector<double> dists;
  dists.reserve(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == out.nearest_train_idx) continue;
    dists.push_back((trainset.row(i) - trainset.row(out.nearest_train_idx)).norm());
  }
  std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
  const double denom = std::accumulate(dists.begin(), dists.begin() + k, 0.0) / k;

  if (denom == 0.0) {
    if (out.l2_distance == 0.0) {
      out.calibrated_ratio = 0.0;
    } else {
      out.calibrated_ratio = std::numeric_limits<double>::infinity();
      out.infinite_ratio = true;
    }
  } else {
    out.calibrated_ratio = out.l2_distance / denom;
  }
  return out;
}

void MemThresholds::validate() const {
  if (!(eps_exact > 0.0) || !std::isfinite(eps_exact))
    throw std::invalid_argument("MemThresholds: eps_exact must be positive and finite");
  if (!(tau_near > 0.0) || !std::isfinite(tau_near))
    throw std::invalid_argument("MemThresholds: tau_near must be positive and finite");
  if (margin < 0.0) throw std::invalid_argument("MemThresholds: margin must be >= 0");
  if (dd_cutoff < 0.0) throw std::invalid_argument("MemThresholds: dd_cutoff must be >= 0");
  if (calib_k < 1) throw std::invalid_argument("MemThresholds: calib_k must be >= 1");
}

std::string to_string(MemLabel label) {
  switch (label) {
    case MemLabel::not_memorized: return "not";
    case MemLabel::exact: return "exact";
    case MemLabel::near: return "near";
  }
  return "?";
}

std::string to_string(MemType type) {
  switch (type) {
    case MemType::none: return "none";
    case MemType::od_mem: return "od_mem";
    case MemType::dd_mem: return "dd_mem";
    case MemType::unresolved: return "unresolved";
  }
  return "?";
}

std::vector<MemRecord> label_and_classify(
    const Batch& generated, const Batch& trainset,
    const std::function<double(const Vec&)>* gt_oracle,
    const std::vector<lid::LidEstimate>& model_lids, const MemThresholds& thresholds) {
  thresholds.validate();
  if (static_cast<Eigen::Index>(model_lids.size()) != generated.rows())
    throw std::invalid_argument("label_and_classify: need one LID estimate per generated row");

  std::vector<MemRecord> records;
  records.reserve(generated.rows());
  for (Eigen::Index i = 0; i < generated.rows(); ++i) {
    MemRecord rec;
    rec.sample = generated.row(i).transpose();
    const auto cal = calibrated_l2(rec.sample, trainset, thresholds.calib_k);
    rec.nearest_train_idx = cal.nearest_train_idx;
    rec.l2_distance = cal.l2_distance;
    rec.calibrated_ratio = cal.calibrated_ratio;
    rec.lid_model = model_lids[static_cast<std::size_t>(i)];

    if (cal.l2_distance <= thresholds.eps_exact) {
      rec.label = MemLabel::exact;
    } else if (cal.calibrated_ratio <= thresholds.tau_near) {
      rec.label = MemLabel::near;
    } else {
      rec.label = MemLabel::not_memorized;
    }

    if (rec.label == MemLabel::not_memorized) {
      rec.mem_type = MemType::none;
    } else if (!gt_oracle || !*gt_oracle) {
      rec.mem_type = MemType::unresolved;
    } else {
      const double gt = (*gt_oracle)(rec.sample);
      rec.lid_gt = gt;
      const double model_value = rec.lid_model.value;
      if (model_value < gt - thresholds.margin) {
        rec.mem_type = MemType::od_mem;
      } else if (gt <= thresholds.dd_cutoff && model_value <= gt + thresholds.margin) {
        rec.mem_type = MemType::dd_mem;
      } else {
        rec.mem_type = MemType::unresolved;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

} // namespace lidlab::mem
