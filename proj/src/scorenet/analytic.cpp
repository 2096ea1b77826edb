#include "lidlab/scorenet/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lidlab::scorenet {

using manifolds::Component;
using manifolds::ComponentKind;

AnalyticMixtureScore::AnalyticMixtureScore(manifolds::ManifoldSpec spec,
                                           diffusion::Schedule schedule)
    : spec_(std::move(spec)), schedule_(std::move(schedule)) {
  if (!spec_.has_closed_form_score())
    throw std::invalid_argument(
        "AnalyticMixtureScore: spec contains a von Mises component, which has no "
        "closed-form noised score");
  if (spec_.has_class_labels()) classes_ = spec_.class_set();
}

Vec AnalyticMixtureScore::one_hot(int class_label) const {
  Vec c = Vec::Zero(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i] == class_label) {
      c[static_cast<Eigen::Index>(i)] = 1.0;
      return c;
    }
  }
  throw std::invalid_argument("one_hot: unknown class " + std::to_string(class_label));
}

std::string AnalyticMixtureScore::describe() const {
  return "analytic mixture (" + std::to_string(spec_.components().size()) + " components)";
}

// Per-evaluation workspace: component responsibilities and per-component
// scores s_i = -C_i^{-1}(x - psi mu_i) with C_i = sigma^2 I + psi^2 B D B^T.
struct AnalyticMixtureScore::Responsibilities {
  std::vector<double> r;
  std::vector<Vec> s;
  std::vector<const Component*> comps;
  double psi = 0.0;
  double sig2 = 0.0;
};

AnalyticMixtureScore::Responsibilities AnalyticMixtureScore::responsibilities(
    const Vec& x, double t, const Vec& c) const {
  Responsibilities out;
  out.psi = schedule_.psi(t);
  out.sig2 = schedule_.sigma2(t);
  const double psi2 = out.psi * out.psi;
  const int d = ambient_dim();

  std::optional<int> wanted_class;
  if (c.size() != 0) {
    int hot = -1;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c[i] == 0.0) continue;
      if (c[i] == 1.0 && hot < 0) {
        hot = static_cast<int>(i);
      } else {
        throw std::invalid_argument(
            "analytic conditional models take one-hot class vectors");
      }
    }
    if (hot < 0) throw std::invalid_argument("analytic conditioning vector is all-zero");
    wanted_class = classes_[static_cast<std::size_t>(hot)];
  }

  std::vector<double> logits;
  for (const auto& comp : spec_.components()) {
    if (wanted_class && comp.class_label != *wanted_class) continue;
    out.comps.push_back(&comp);
    const Vec delta = x - out.psi * comp.mean;

    double quad, logdet;
    Vec score_i;
    if (comp.kind == ComponentKind::point_mass || comp.variances.size() == 0) {
      quad = delta.squaredNorm() / out.sig2;
      logdet = d * std::log(out.sig2);
      score_i = -delta / out.sig2;
    } else {
      const Vec w = comp.basis.transpose() * delta;
      const Vec noised_var = (psi2 * comp.variances.array() + out.sig2).matrix();
      quad = (delta.squaredNorm() - w.squaredNorm()) / out.sig2 +
             (w.array().square() / noised_var.array()).sum();
      logdet = (d - static_cast<int>(comp.variances.size())) * std::log(out.sig2) +
               noised_var.array().log().sum();
      score_i = -(delta - comp.basis * w) / out.sig2 -
                comp.basis * (w.array() / noised_var.array()).matrix();
    }
    const double log_density =
        -0.5 * (quad + logdet + d * std::log(2.0 * std::numbers::pi));
    logits.push_back(std::log(comp.weight) + log_density);
    out.s.push_back(std::move(score_i));
  }

  if (out.comps.empty())
    throw std::invalid_argument("analytic conditioning selects no component");

  // responsibilities by log-sum-exp
  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - max_logit);
  out.r.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    out.r[i] = std::exp(logits[i] - max_logit) / denom;
  return out;
}

Vec AnalyticMixtureScore::score_impl(const Vec& x, double t, const Vec& c) const {
  const auto rs = responsibilities(x, t, c);
  Vec s = Vec::Zero(ambient_dim());
  for (std::size_t i = 0; i < rs.r.size(); ++i) s += rs.r[i] * rs.s[i];
  return s;
}

Vec AnalyticMixtureScore::score_dx_impl(const Vec& x, double t, const Vec& c,
                                        const Vec& v) const {
  // d/dx of sum_i r_i s_i: the Jacobian is
  //   sum_i r_i (-C_i^{-1}) + sum_i r_i s_i (s_i - s)^T.
  const auto rs = responsibilities(x, t, c);
  const double psi2 = rs.psi * rs.psi;
  Vec s = Vec::Zero(ambient_dim());
  for (std::size_t i = 0; i < rs.r.size(); ++i) s += rs.r[i] * rs.s[i];

  Vec out = Vec::Zero(ambient_dim());
  for (std::size_t i = 0; i < rs.r.size(); ++i) {
    const Component& comp = *rs.comps[i];
    Vec cinv_v;
    if (comp.kind == ComponentKind::point_mass || comp.variances.size() == 0) {
      cinv_v = v / rs.sig2;
    } else {
      const Vec wv = comp.basis.transpose() * v;
      const Vec noised_var = (psi2 * comp.variances.array() + rs.sig2).matrix();
      cinv_v = (v - comp.basis * wv) / rs.sig2 +
               comp.basis * (wv.array() / noised_var.array()).matrix();
    }
    out += rs.r[i] * (-cinv_v + rs.s[i] * ((rs.s[i] - s).dot(v)));
  }
  return out;
}

Vec analytic_score(const manifolds::ManifoldSpec& spec, const diffusion::Schedule& schedule,
                   const Vec& x, double t, std::optional<int> class_label) {
  const AnalyticMixtureScore model(spec, schedule);
  if (!class_label) return model.score(x, t);
  return model.score(x, t, model.one_hot(*class_label));
}

// --- LinearConditionalScore ------------------------------------------------

LinearConditionalScore::LinearConditionalScore(Mat mean_map, diffusion::Schedule schedule)
    : mean_map_(std::move(mean_map)), schedule_(std::move(schedule)) {
  if (mean_map_.rows() < 1 || mean_map_.cols() < 1)
    throw std::invalid_argument("LinearConditionalScore: empty mean map");
}

Vec LinearConditionalScore::score_impl(const Vec& x, double t, const Vec& c) const {
  const Vec mean = c.size() ? Vec(mean_map_ * c) : Vec(Vec::Zero(ambient_dim()));
  return -(x - schedule_.psi(t) * mean) / schedule_.sigma2(t);
}

Vec LinearConditionalScore::score_dx_impl(const Vec&, double t, const Vec&, const Vec& v) const {
  return -v / schedule_.sigma2(t);
}

Vec LinearConditionalScore::score_vjp_c(const Vec&, double t, const Vec& c, const Vec& u) const {
  if (c.size() == 0) return Vec::Zero(cond_dim());
  return (schedule_.psi(t) / schedule_.sigma2(t)) * (mean_map_.transpose() * u);
}

Vec LinearConditionalScore::score_dx_vjp_c(const Vec&, double, const Vec&, const Vec&,
                                           const Vec&) const {
  return Vec::Zero(cond_dim()); // the Jacobian in x does not depend on c
}

} // namespace lidlab::scorenet
