#include "lidlab/diffusion/guidance.hpp"

#include <cmath>
#include <stdexcept>

namespace lidlab::diffusion {

void GuidanceConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("GuidanceConfig: lambda must be finite and >= 0");
}

Vec cfg_score(const scorenet::ScoreModel& model, const Vec& x, double t, const Vec& c,
              const GuidanceConfig& guidance) {
  guidance.validate();
  if (model.cond_dim() == 0)
    throw std::invalid_argument("cfg_score: model is unconditional");
  const Vec base = model.score(x, t, Vec());
  if (c.size() == 0) return base; // the CFG vector vanishes identically
  const Vec cond = model.score(x, t, c);
  return base + guidance.lambda * (cond - base);
}

GuidedScore::GuidedScore(const scorenet::ScoreModel& model, std::optional<Vec> cond,
                         std::optional<GuidanceConfig> guidance)
    : model_(model), cond_(std::move(cond)), guidance_(guidance) {
  if (guidance_ && !cond_)
    throw std::invalid_argument("GuidedScore: guidance given without conditioning");
  if (guidance_) guidance_->validate();
  if (cond_ && model_.cond_dim() == 0)
    throw std::invalid_argument("GuidedScore: conditioning given to an unconditional model");
}

Vec GuidedScore::operator()(const Vec& x, double t) const {
  if (!cond_) return model_.score(x, t, Vec());
  if (!guidance_) return model_.score(x, t, *cond_);
  return cfg_score(model_, x, t, *cond_, *guidance_);
}

Vec GuidedScore::dx(const Vec& x, double t, const Vec& v) const {
  if (!cond_) return model_.score_dx(x, t, Vec(), v);
  if (!guidance_) return model_.score_dx(x, t, *cond_, v);
  const Vec base = model_.score_dx(x, t, Vec(), v);
  if (cond_->size() == 0) return base;
  const Vec cond = model_.score_dx(x, t, *cond_, v);
  return base + guidance_->lambda * (cond - base);
}

} // namespace lidlab::diffusion
