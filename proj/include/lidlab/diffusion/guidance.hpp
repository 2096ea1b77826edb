#pragma once

#include <optional>

#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::diffusion {

/// Classifier-free guidance strength; the null condition is the zero
/// embedding by convention.
struct GuidanceConfig {
  double lambda = 1.0;

  void validate() const;
};

/// s_cfg(x,t,c) = s(x,t,null) + lambda (s(x,t,c) - s(x,t,null)).
/// An empty c makes the guided score collapse to the null score for any
/// lambda. Throws for unconditional models.
Vec cfg_score(const scorenet::ScoreModel& model, const Vec& x, double t, const Vec& c,
              const GuidanceConfig& guidance);

/// Uniform view over the plain, conditional and guided score variants, with
/// matching directional derivatives. Used by samplers and estimators.
class GuidedScore {
 public:
  GuidedScore(const scorenet::ScoreModel& model, std::optional<Vec> cond,
              std::optional<GuidanceConfig> guidance);

  Vec operator()(const Vec& x, double t) const;
  Vec dx(const Vec& x, double t, const Vec& v) const;
  const scorenet::ScoreModel& model() const { return model_; }

 private:
  const scorenet::ScoreModel& model_;
  std::optional<Vec> cond_;
  std::optional<GuidanceConfig> guidance_;
};

} // namespace lidlab::diffusion
