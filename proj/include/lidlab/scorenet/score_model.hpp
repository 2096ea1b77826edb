#pragma once

#include <memory>
#include <string>

#include "lidlab/core/types.hpp"
#include "lidlab/diffusion/schedule.hpp"

namespace lidlab::scorenet {

/// Differentiable score function s(x, t, c) of a noised distribution.
///
/// Conditioning convention: an empty vector stands for the null condition
/// (the zero embedding for trained models, the full mixture for analytic
/// class models). Implementations must be pure: identical inputs and
/// parameters give bit-identical outputs.
class ScoreModel {
 public:
  enum class Kind { analytic, trained };

  virtual ~ScoreModel() = default;

  virtual Kind kind() const = 0;
  virtual int ambient_dim() const = 0;
  /// 0 means the model is unconditional.
  virtual int cond_dim() const = 0;
  virtual const diffusion::Schedule& schedule() const = 0;

  /// s(x, t, c). Validates t in (0,1], dim(x) = d and the conditioning shape.
  Vec score(const Vec& x, double t, const Vec& c = Vec()) const;
  /// Directional derivative (d s / d x) v at fixed (t, c).
  Vec score_dx(const Vec& x, double t, const Vec& c, const Vec& v) const;

  /// Whether gradients with respect to the conditioning vector are available.
  virtual bool supports_cond_grad() const { return false; }
  /// (d s / d c)^T u.
  virtual Vec score_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u) const;
  /// grad_c of u^T (d s / d x) v, the conditioning gradient of a directional
  /// derivative (needed to differentiate trace terms through c).
  virtual Vec score_dx_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u,
                             const Vec& v) const;

  virtual std::string describe() const = 0;

 protected:
  virtual Vec score_impl(const Vec& x, double t, const Vec& c) const = 0;
  virtual Vec score_dx_impl(const Vec& x, double t, const Vec& c, const Vec& v) const = 0;

  void check_inputs(const Vec& x, double t, const Vec& c) const;
};

/// Checked evaluation of the score; identical to model.score.
inline Vec eval_score(const ScoreModel& model, const Vec& x, double t, const Vec& c = Vec()) {
  return model.score(x, t, c);
}

} // namespace lidlab::scorenet
