#include "lidlab/scorenet/score_model.hpp"

#include <stdexcept>

namespace lidlab::scorenet {

void ScoreModel::check_inputs(const Vec& x, double t, const Vec& c) const {
  if (!(t > 0.0 && t <= 1.0))
    throw std::invalid_argument("score: t must lie in (0, 1], got " + std::to_string(t));
  if (x.size() != ambient_dim())
    throw std::invalid_argument("score: x has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(ambient_dim()));
  if (c.size() != 0) {
    if (cond_dim() == 0)
      throw std::invalid_argument("score: conditioning given to an unconditional model");
    if (c.size() != cond_dim())
      throw std::invalid_argument("score: conditioning has dimension " +
                                  std::to_string(c.size()) + ", model expects " +
                                  std::to_string(cond_dim()));
  }
  if (!x.allFinite() || !c.allFinite())
    throw std::invalid_argument("score: non-finite input");
}

Vec ScoreModel::score(const Vec& x, double t, const Vec& c) const {
  check_inputs(x, t, c);
  return score_impl(x, t, c);
}

Vec ScoreModel::score_dx(const Vec& x, double t, const Vec& c, const Vec& v) const {
  check_inputs(x, t, c);
  if (v.size() != ambient_dim())
    throw std::invalid_argument("score_dx: direction has wrong dimension");
  return score_dx_impl(x, t, c, v);
}

Vec ScoreModel::score_vjp_c(const Vec&, double, const Vec&, const Vec&) const {
  throw std::logic_error("this model does not provide conditioning gradients");
}

Vec ScoreModel::score_dx_vjp_c(const Vec&, double, const Vec&, const Vec&, const Vec&) const {
  throw std::logic_error("this model does not provide conditioning gradients");
}

} // namespace lidlab::scorenet
