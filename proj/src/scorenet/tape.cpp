#include "lidlab/scorenet/tape.hpp"

#include <stdexcept>

namespace lidlab::scorenet {

CondTape::CondTape(const ScoreModel& model, Vec c) : model_(model), c_(std::move(c)) {
  if (model_.cond_dim() == 0)
    throw std::invalid_argument("CondTape: model is unconditional");
  if (!model_.supports_cond_grad())
    throw std::invalid_argument("CondTape: model does not provide conditioning gradients");
  if (c_.size() != model_.cond_dim())
    throw std::invalid_argument("CondTape: conditioning vector has wrong dimension");
  grad_c_ = Vec::Zero(c_.size());
}

CondTape::VecId CondTape::push_vec(Vec value, std::function<void(const Vec&)> pull) {
  vvalues_.push_back(std::move(value));
  vgrads_.emplace_back(Vec::Zero(vvalues_.back().size()));
  const int i = static_cast<int>(vvalues_.size()) - 1;
  backward_.push_back([this, i, pull = std::move(pull)] {
    if (pull && !vgrads_[i].isZero(0.0)) pull(vgrads_[i]);
  });
  return {i};
}

CondTape::ScalId CondTape::push_scal(double value, std::function<void(double)> pull) {
  svalues_.push_back(value);
  sgrads_.push_back(0.0);
  const int i = static_cast<int>(svalues_.size()) - 1;
  backward_.push_back([this, i, pull = std::move(pull)] {
    if (pull && sgrads_[i] != 0.0) pull(sgrads_[i]);
  });
  return {i};
}

CondTape::VecId CondTape::score(const Vec& x, double t, bool conditional) {
  ++calls_;
  if (!conditional) {
    return push_vec(model_.score(x, t, Vec()), nullptr);
  }
  Vec s = model_.score(x, t, c_);
  return push_vec(std::move(s), [this, x, t](const Vec& bar) {
    grad_c_ += model_.score_vjp_c(x, t, c_, bar);
  });
}

CondTape::VecId CondTape::score_dx(const Vec& x, double t, bool conditional, const Vec& v) {
  ++calls_;
  if (!conditional) {
    return push_vec(model_.score_dx(x, t, Vec(), v), nullptr);
  }
  Vec s = model_.score_dx(x, t, c_, v);
  return push_vec(std::move(s), [this, x, t, v](const Vec& bar) {
    grad_c_ += model_.score_dx_vjp_c(x, t, c_, bar, v);
  });
}

CondTape::VecId CondTape::cfg_score(const Vec& x, double t, double lambda) {
  const VecId base = score(x, t, false);
  const VecId cond = score(x, t, true);
  return axpy(lambda, sub(cond, base), base);
}

CondTape::VecId CondTape::cfg_score_dx(const Vec& x, double t, double lambda, const Vec& v) {
  const VecId base = score_dx(x, t, false, v);
  const VecId cond = score_dx(x, t, true, v);
  return axpy(lambda, sub(cond, base), base);
}

CondTape::VecId CondTape::sub(VecId a, VecId b) {
  Vec val = vvalues_[a.i] - vvalues_[b.i];
  return push_vec(std::move(val), [this, a, b](const Vec& bar) {
    vgrads_[a.i] += bar;
    vgrads_[b.i] -= bar;
  });
}

CondTape::VecId CondTape::axpy(double k, VecId a, VecId b) {
  Vec val = k * vvalues_[a.i] + vvalues_[b.i];
  return push_vec(std::move(val), [this, k, a, b](const Vec& bar) {
    vgrads_[a.i] += k * bar;
    vgrads_[b.i] += bar;
  });
}

CondTape::ScalId CondTape::squared_norm(VecId a) {
  const double val = vvalues_[a.i].squaredNorm();
  return push_scal(val, [this, a](double bar) { vgrads_[a.i] += 2.0 * bar * vvalues_[a.i]; });
}

CondTape::ScalId CondTape::dot(VecId a, const Vec& w) {
  const double val = vvalues_[a.i].dot(w);
  return push_scal(val, [this, a, w](double bar) { vgrads_[a.i] += bar * w; });
}

CondTape::ScalId CondTape::add(ScalId a, ScalId b) {
  return push_scal(svalues_[a.i] + svalues_[b.i], [this, a, b](double bar) {
    sgrads_[a.i] += bar;
    sgrads_[b.i] += bar;
  });
}

CondTape::ScalId CondTape::affine(ScalId a, double scale, double shift) {
  return push_scal(scale * svalues_[a.i] + shift,
                   [this, a, scale](double bar) { sgrads_[a.i] += scale * bar; });
}

Vec CondTape::grad(ScalId objective) {
  if (calls_ == 0)
    throw std::logic_error("CondTape::grad: no score calls were recorded");
  for (auto& g : vgrads_) g.setZero();
  for (auto& g : sgrads_) g = 0.0;
  grad_c_.setZero();
  sgrads_[objective.i] = 1.0;
  for (auto it = backward_.rbegin(); it != backward_.rend(); ++it) (*it)();
  return grad_c_;
}

} // namespace lidlab::scorenet
