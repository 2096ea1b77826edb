#pragma once

#include <functional>
#include <vector>

#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::scorenet {

/// Records a scalar objective built from score evaluations so its gradient
/// with respect to the conditioning vector can be pulled back afterwards.
///
/// The tape holds one variable: the conditioning vector c. Points x and times
/// t entering score calls are treated as constants (trajectories are frozen
/// before accumulation), so the gradient flows only through the explicit c
/// argument of each recorded call.
class CondTape {
 public:
  CondTape(const ScoreModel& model, Vec c);
  CondTape(const CondTape&) = delete;            // closures capture this
  CondTape& operator=(const CondTape&) = delete;

  struct VecId { int i; };
  struct ScalId { int i; };

  /// Score at (x, t); conditional=false evaluates at the null condition and
  /// contributes nothing to the gradient.
  VecId score(const Vec& x, double t, bool conditional);
  /// Directional derivative (d s / d x) v as a tape node.
  VecId score_dx(const Vec& x, double t, bool conditional, const Vec& v);
  /// s(x,t,null) + lambda (s(x,t,c) - s(x,t,null)).
  VecId cfg_score(const Vec& x, double t, double lambda);
  VecId cfg_score_dx(const Vec& x, double t, double lambda, const Vec& v);

  VecId sub(VecId a, VecId b);
  VecId axpy(double k, VecId a, VecId b); // k*a + b
  ScalId squared_norm(VecId a);
  ScalId dot(VecId a, const Vec& w);
  ScalId add(ScalId a, ScalId b);
  ScalId affine(ScalId a, double scale, double shift);

  double value(ScalId s) const { return svalues_[s.i]; }
  const Vec& value(VecId v) const { return vvalues_[v.i]; }
  const Vec& cond() const { return c_; }
  std::size_t recorded_calls() const { return calls_; }

  /// Gradient of the objective with respect to c. Throws on an empty tape.
  Vec grad(ScalId objective);

 private:
  VecId push_vec(Vec value, std::function<void(const Vec&)> pull);
  ScalId push_scal(double value, std::function<void(double)> pull);

  const ScoreModel& model_;
  Vec c_;
  std::vector<Vec> vvalues_;
  std::vector<Vec> vgrads_;
  std::vector<double> svalues_;
  std::vector<double> sgrads_;
  // uniform backward list over both node kinds, in creation order
  std::vector<std::function<void()>> backward_;
  Vec grad_c_;
  std::size_t calls_ = 0;
};

/// Gradient of a recorded scalar objective with respect to the conditioning
/// vector; thin wrapper so the operation reads like the rest of the API.
inline Vec conditioning_gradient(CondTape& tape, CondTape::ScalId objective) {
  return tape.grad(objective);
}

} // namespace lidlab::scorenet
