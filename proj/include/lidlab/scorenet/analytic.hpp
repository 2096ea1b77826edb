#pragma once

#include <memory>

#include "lidlab/manifolds/manifold.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::scorenet {

/// Exact score of a noised Gaussian/point-mass mixture: the marginal at time
/// t is sum_i w_i N(psi mu_i, psi^2 Sigma_i + sigma^2 I). Class-labeled specs
/// are conditional; the conditioning vector is a one-hot over the class set
/// and restricts the mixture to matching components (renormalized). An empty
/// conditioning vector selects the full mixture.
class AnalyticMixtureScore : public ScoreModel {
 public:
  AnalyticMixtureScore(manifolds::ManifoldSpec spec, diffusion::Schedule schedule);

  Kind kind() const override { return Kind::analytic; }
  int ambient_dim() const override { return spec_.ambient_dim(); }
  int cond_dim() const override { return static_cast<int>(classes_.size()); }
  const diffusion::Schedule& schedule() const override { return schedule_; }
  std::string describe() const override;

  const manifolds::ManifoldSpec& spec() const { return spec_; }
  const std::vector<int>& classes() const { return classes_; }
  Vec one_hot(int class_label) const;

 protected:
  Vec score_impl(const Vec& x, double t, const Vec& c) const override;
  Vec score_dx_impl(const Vec& x, double t, const Vec& c, const Vec& v) const override;

 private:
  struct Responsibilities;
  Responsibilities responsibilities(const Vec& x, double t, const Vec& c) const;

  manifolds::ManifoldSpec spec_;
  diffusion::Schedule schedule_;
  std::vector<int> classes_;
};

/// analytic_score(spec, schedule, x, t, class): exact score of the noised
/// mixture, optionally restricted to one class. Throws when the spec has a
/// von Mises component (no closed form).
Vec analytic_score(const manifolds::ManifoldSpec& spec, const diffusion::Schedule& schedule,
                   const Vec& x, double t, std::optional<int> class_label = std::nullopt);

/// Conditional point mass at mean M c: s(x, t, c) = -(x - psi(t) M c) / sigma^2(t).
/// The score is linear in c, so conditioning gradients have a closed form;
/// used as an oracle for the gradient machinery.
class LinearConditionalScore : public ScoreModel {
 public:
  LinearConditionalScore(Mat mean_map, diffusion::Schedule schedule);

  Kind kind() const override { return Kind::analytic; }
  int ambient_dim() const override { return static_cast<int>(mean_map_.rows()); }
  int cond_dim() const override { return static_cast<int>(mean_map_.cols()); }
  const diffusion::Schedule& schedule() const override { return schedule_; }
  bool supports_cond_grad() const override { return true; }
  std::string describe() const override { return "linear-conditional point mass"; }

  Vec score_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u) const override;
  Vec score_dx_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u,
                     const Vec& v) const override;
  const Mat& mean_map() const { return mean_map_; }

 protected:
  Vec score_impl(const Vec& x, double t, const Vec& c) const override;
  Vec score_dx_impl(const Vec& x, double t, const Vec& c, const Vec& v) const override;

 private:
  Mat mean_map_;
  diffusion::Schedule schedule_;
};

} // namespace lidlab::scorenet
