#include "doctest.h"

#include <cmath>

#include "lidlab/diffusion/sampler.hpp"
#include "lidlab/diffusion/schedule.hpp"
#include "lidlab/scorenet/analytic.hpp"

using namespace lidlab;
using namespace lidlab::diffusion;

TEST_CASE("schedule endpoints and closed form") {
  const Schedule s;
  const auto at0 = schedule_eval(s, 0.0);
  CHECK(at0.psi == 1.0);
  CHECK(at0.sigma == 0.0);
  CHECK(at0.sigma_tilde == 0.0);

  // frozen regression values at t = 0.05 for beta in [0.1, 20]
  const auto at = schedule_eval(s, 0.05);
  CHECK(at.psi == doctest::Approx(0.9851735110233747).epsilon(1e-14));
  CHECK(at.sigma == doctest::Approx(0.17156093138554782).epsilon(1e-14));
  CHECK(at.sigma_tilde == doctest::Approx(0.1741428585583208).epsilon(1e-14));

  CHECK_THROWS_AS(schedule_eval(s, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(schedule_eval(s, 1.01), std::invalid_argument);
}

TEST_CASE("variance preservation on a grid") {
  const Schedule s;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    CHECK(s.psi(t) * s.psi(t) + s.sigma2(t) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("forward perturbation: determinism and concentration") {
  const Schedule s;
  Vec x(2);
  x << 1.0, -0.5;
  Rng a(5), b(5);
  CHECK((forward_perturb(x, s, 0.5, a) - forward_perturb(x, s, 0.5, b)).norm() == 0.0);

  Rng rng(17);
  const int n = 100000;
  Vec mean = Vec::Zero(2);
  for (int i = 0; i < n; ++i) mean += forward_perturb(x, s, 0.5, rng);
  mean /= n;
  const Vec expected = s.psi(0.5) * x;
  const double tol = 3.0 * s.sigma(0.5) / std::sqrt(static_cast<double>(n));
  CHECK((mean - expected).cwiseAbs().maxCoeff() < tol);

  Rng r2(3);
  CHECK_THROWS_AS(forward_perturb(x, s, 0.0, r2), std::invalid_argument);
}

namespace {

std::shared_ptr<scorenet::AnalyticMixtureScore> standard_normal_model(int d) {
  return std::make_shared<scorenet::AnalyticMixtureScore>(manifolds::make_isotropic_gaussian(d),
                                                          Schedule());
}

std::shared_ptr<scorenet::AnalyticMixtureScore> point_mass_model(const Vec& x0) {
  manifolds::ManifoldSpec spec(x0.size(), {manifolds::make_point_mass(x0, 1.0)});
  return std::make_shared<scorenet::AnalyticMixtureScore>(spec, Schedule());
}

} // namespace

TEST_CASE("cfg score algebra") {
  Mat mean_map(2, 3);
  mean_map << 1.0, 0.0, -0.5, 0.25, 2.0, 0.0;
  const scorenet::LinearConditionalScore model(mean_map, Schedule());
  Vec x(2);
  x << 0.3, -0.7;
  Vec c(3);
  c << 1.0, -1.0, 0.5;
  const double t = 0.4;

  const Vec s_cond = model.score(x, t, c);
  const Vec s_null = model.score(x, t, Vec());
  CHECK((cfg_score(model, x, t, c, {1.0}) - s_cond).norm() == 0.0);
  CHECK((cfg_score(model, x, t, c, {0.0}) - s_null).norm() == 0.0);
  CHECK((cfg_score(model, x, t, Vec(), {7.5}) - s_null).norm() == 0.0);

  // affine in lambda: s(l1) + s(l2) = s(l1 + l2) + s(0)
  const Vec lhs = cfg_score(model, x, t, c, {0.7}) + cfg_score(model, x, t, c, {1.8});
  const Vec rhs = cfg_score(model, x, t, c, {2.5}) + cfg_score(model, x, t, c, {0.0});
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);

  const auto uncond = standard_normal_model(2);
  CHECK_THROWS_AS(cfg_score(*uncond, x, t, Vec(), {1.0}), std::invalid_argument);
}

TEST_CASE("ddim reparameterized score identity") {
  // sigma~(t) s~(x, t) must equal sigma(t) s(psi(t) x, t)
  const auto model = standard_normal_model(3);
  const Schedule& s = model->schedule();
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = rng.gaussian_vec(3);
    const double t = rng.uniform_open_closed(1e-3, 1.0);
    const Vec s_tilde = s.psi(t) * model->score(s.psi(t) * x, t);
    const Vec lhs = s.sigma_tilde(t) * s_tilde;
    const Vec rhs = s.sigma(t) * model->score(s.psi(t) * x, t);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("reverse ode on standard normal reproduces the marginal") {
  const auto model = standard_normal_model(2);
  SampleOptions opt;
  opt.kind = SamplerKind::ode;
  opt.steps = 200;
  const auto run = sample_reverse(*model, 10000, opt, 42);
  const Vec mean = run.samples.colwise().mean().transpose();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
  const Mat centered = run.samples.rowwise() - mean.transpose();
  const Mat cov = centered.transpose() * centered / (run.samples.rows() - 1);
  const Eigen::SelfAdjointEigenSolver<Mat> es(cov - Mat::Identity(2, 2));
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("reverse samplers contract to a point mass") {
  Vec x0(2);
  x0 << 0.8, -0.3;
  const auto model = point_mass_model(x0);
  for (auto kind : {SamplerKind::ode, SamplerKind::ddim, SamplerKind::sde}) {
    SampleOptions opt;
    opt.kind = kind;
    opt.steps = 200;
    const auto run = sample_reverse(*model, 200, opt, 7);
    for (int i = 0; i < run.samples.rows(); ++i) {
      CHECK((run.samples.row(i).transpose() - x0).norm() < 0.05);
    }
  }
}

TEST_CASE("sde and ode match moments on the standard normal") {
  const auto model = standard_normal_model(2);
  SampleOptions ode_opt, sde_opt;
  ode_opt.kind = SamplerKind::ode;
  sde_opt.kind = SamplerKind::sde;
  ode_opt.steps = sde_opt.steps = 200;
  const auto ode = sample_reverse(*model, 8000, ode_opt, 1);
  const auto sde = sample_reverse(*model, 8000, sde_opt, 2);
  CHECK((ode.samples.colwise().mean() - sde.samples.colwise().mean()).cwiseAbs().maxCoeff() <
        0.06);
  const double ode_var = ode.samples.array().square().mean();
  const double sde_var = sde.samples.array().square().mean();
  CHECK(ode_var == doctest::Approx(sde_var).epsilon(0.06));
}

TEST_CASE("trajectories are deterministic per seed and recorded on request") {
  const auto model = standard_normal_model(2);
  SampleOptions opt;
  opt.kind = SamplerKind::ddim;
  opt.steps = 50;
  opt.record_trajectory = true;
  const auto a = sample_reverse(*model, 3, opt, 9);
  const auto b = sample_reverse(*model, 3, opt, 9);
  REQUIRE(a.trajectories.size() == 3);
  CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    CHECK((a.trajectories[i] - b.trajectories[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.trajectories[i].rows() == opt.steps + 1);
    CHECK(a.trajectories[i](0, 0) == 1.0);
  }
  CHECK_THROWS_AS(sample_reverse(*model, 1, SampleOptions{.steps = 0}, 1),
                  std::invalid_argument);
}

TEST_CASE("guidance without conditioning is rejected") {
  Mat mean_map = Mat::Identity(2, 2);
  const scorenet::LinearConditionalScore model(mean_map, Schedule());
  SampleOptions opt;
  opt.guidance = GuidanceConfig{2.0};
  CHECK_THROWS_AS(sample_reverse(model, 1, opt, 1), std::invalid_argument);
}
