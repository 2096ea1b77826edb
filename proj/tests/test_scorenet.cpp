#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "lidlab/core/stats.hpp"
#include "lidlab/diffusion/schedule.hpp"
#include "lidlab/manifolds/manifold.hpp"
#include "lidlab/scorenet/analytic.hpp"
#include "lidlab/scorenet/checkpoint.hpp"
#include "lidlab/scorenet/divergence.hpp"
#include "lidlab/scorenet/tape.hpp"
#include "lidlab/scorenet/train.hpp"

using namespace lidlab;
using namespace lidlab::scorenet;
using lidlab::diffusion::Schedule;
using lidlab::manifolds::ManifoldSpec;

namespace {

// Independent oracle: log of the noised mixture density with dense covariance
// algebra, no shared code with the analytic score path.
double dense_log_density(const ManifoldSpec& spec, const Schedule& sched, const Vec& x,
                         double t) {
  const double psi = sched.psi(t);
  const double sig2 = sched.sigma2(t);
  const auto d = x.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (const auto& comp : spec.components()) {
    Mat cov = sig2 * Mat::Identity(d, d);
    if (comp.variances.size() > 0)
      cov += psi * psi * comp.basis * comp.variances.asDiagonal() * comp.basis.transpose();
    const Eigen::LDLT<Mat> ldlt(cov);
    const Vec delta = x - psi * comp.mean;
    const double quad = delta.dot(ldlt.solve(delta));
    const double logdet = ldlt.vectorD().array().log().sum();
    const double lp = std::log(comp.weight) -
                      0.5 * (quad + logdet + d * std::log(2.0 * M_PI));
    logs.push_back(lp);
    best = std::max(best, lp);
  }
  double acc = 0.0;
  for (double lp : logs) acc += std::exp(lp - best);
  return best + std::log(acc);
}

Vec fd_score(const ManifoldSpec& spec, const Schedule& sched, const Vec& x, double t,
             double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (dense_log_density(spec, sched, xp, t) - dense_log_density(spec, sched, xm, t)) /
           (2.0 * h);
  }
  return g;
}

ManifoldSpec two_atoms() {
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << -1.0, 0.0;
  return ManifoldSpec(2, {manifolds::make_point_mass(a, 0.5),
                          manifolds::make_point_mass(b, 0.5)});
}

} // namespace

TEST_CASE("analytic point mass score is -(x - psi x0) / sigma^2") {
  Vec x0(2);
  x0 << 0.4, -1.1;
  const ManifoldSpec spec(2, {manifolds::make_point_mass(x0, 1.0)});
  const Schedule sched;
  const AnalyticMixtureScore model(spec, sched);
  Vec x(2);
  x << 2.0, 0.5;
  const double t = 0.3;
  const Vec expected = -(x - sched.psi(t) * x0) / sched.sigma2(t);
  CHECK((model.score(x, t) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic standard normal score is -x / (psi^2 + sigma^2)") {
  const Schedule sched;
  const AnalyticMixtureScore model(manifolds::make_isotropic_gaussian(3), sched);
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const Vec x = rng.gaussian_vec(3);
    const double t = rng.uniform_open_closed(0.01, 1.0);
    const double denom = sched.psi(t) * sched.psi(t) + sched.sigma2(t);
    CHECK((model.score(x, t) + x / denom).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("mixture score matches finite differences of the dense log density") {
  const auto spec = two_atoms();
  const Schedule sched;
  const AnalyticMixtureScore model(spec, sched);
  Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    const Vec x = rng.gaussian_vec(2);
    const double t = rng.uniform_open_closed(0.05, 1.0);
    const Vec got = model.score(x, t);
    const Vec expected = fd_score(spec, sched, x, t);
    CHECK((got - expected).norm() <= 1e-6 * std::max(1.0, expected.norm()));
  }

  // rank-deficient gaussian mixture with distinct means
  Mat basis = Mat::Zero(3, 1);
  basis(1, 0) = 1.0;
  Vec m1 = Vec::Zero(3), m2 = Vec::Ones(3);
  const ManifoldSpec mixed(
      3, {manifolds::make_affine_gaussian(m1, basis, Vec::Constant(1, 0.5), 0.3),
          manifolds::make_point_mass(m2, 0.7)});
  const AnalyticMixtureScore model2(mixed, sched);
  for (int i = 0; i < 10; ++i) {
    const Vec x = rng.gaussian_vec(3);
    const double t = rng.uniform_open_closed(0.05, 1.0);
    const Vec got = model2.score(x, t);
    const Vec expected = fd_score(mixed, sched, x, t);
    CHECK((got - expected).norm() <= 1e-6 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("class restriction reproduces the single-component score") {
  Vec a = Vec::Zero(2), b = Vec::Ones(2);
  const ManifoldSpec spec(2, {manifolds::make_point_mass(a, 0.4, 0),
                              manifolds::make_point_mass(b, 0.6, 1)});
  const Schedule sched;
  const AnalyticMixtureScore model(spec, sched);
  const ManifoldSpec only_b(2, {manifolds::make_point_mass(b, 1.0, 1)});
  const AnalyticMixtureScore model_b(only_b, sched);
  Vec x(2);
  x << 0.7, 0.2;
  const Vec restricted = model.score(x, 0.2, model.one_hot(1));
  CHECK((restricted - model_b.score(x, 0.2)).cwiseAbs().maxCoeff() < 1e-14);

  // analytic_score free function agrees
  CHECK((analytic_score(spec, sched, x, 0.2, 1) - restricted).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("score preconditions are enforced") {
  const AnalyticMixtureScore model(manifolds::make_isotropic_gaussian(2), Schedule());
  Vec x = Vec::Zero(2);
  CHECK_THROWS_AS(model.score(x, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(model.score(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(model.score(Vec::Zero(3), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(model.score(x, 0.5, Vec::Ones(1)), std::invalid_argument);

  // von mises spec has no closed form
  Vec origin = Vec::Zero(2);
  const ManifoldSpec vm(2, {manifolds::make_von_mises_circle(origin, 1.0, 4.0, 0.0, 1.0)});
  CHECK_THROWS_AS(AnalyticMixtureScore(vm, Schedule()), std::invalid_argument);
}

TEST_CASE("analytic jacobian-vector products match finite differences") {
  const auto spec = two_atoms();
  const Schedule sched;
  const AnalyticMixtureScore model(spec, sched);
  Rng rng(3);
  for (int i = 0; i < 8; ++i) {
    const Vec x = rng.gaussian_vec(2);
    const Vec v = rng.gaussian_vec(2);
    const double t = rng.uniform_open_closed(0.05, 1.0);
    const double h = 1e-6;
    const Vec fd = (model.score(x + h * v, t) - model.score(x - h * v, t)) / (2.0 * h);
    CHECK((model.score_dx(x, t, Vec(), v) - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
  }
}

// --- MLP derivative machinery ------------------------------------------------

namespace {

Mlp small_mlp(int in_extra = 0) {
  Architecture arch;
  arch.ambient_dim = 2;
  arch.cond_dim = in_extra;
  arch.hidden = {16, 16};
  arch.fourier_features = 2;
  Mlp mlp(arch);
  Rng rng(77);
  mlp.init_params(rng);
  return mlp;
}

} // namespace

TEST_CASE("mlp jvp and input vjp match finite differences") {
  auto mlp = small_mlp(3);
  const int n_in = mlp.arch().input_dim();
  Rng rng(5);
  const Vec in = rng.gaussian_vec(n_in);
  const Vec v = rng.gaussian_vec(n_in);
  const Vec u = rng.gaussian_vec(mlp.arch().ambient_dim);

  Mlp::Cache cache;
  mlp.forward_cached(in, cache);
  const double h = 1e-6;
  const Vec fd_jvp = (mlp.forward(in + h * v) - mlp.forward(in - h * v)) / (2.0 * h);
  CHECK((mlp.jvp(cache, v) - fd_jvp).norm() <= 1e-7 * std::max(1.0, fd_jvp.norm()));

  // vjp agrees with jvp through the duality u^T (J v) = (J^T u)^T v
  const Vec vjp = mlp.input_vjp(cache, u);
  CHECK(u.dot(mlp.jvp(cache, v)) == doctest::Approx(vjp.dot(v)).epsilon(1e-12));
}

TEST_CASE("mlp mixed second derivative matches finite differences of the jvp") {
  auto mlp = small_mlp(3);
  const int n_in = mlp.arch().input_dim();
  Rng rng(6);
  const Vec in = rng.gaussian_vec(n_in);
  const Vec v = rng.gaussian_vec(n_in);
  const Vec u = rng.gaussian_vec(mlp.arch().ambient_dim);

  Mlp::Cache cache;
  Mlp::TangentCache tangents;
  mlp.forward_cached(in, cache);
  mlp.jvp(cache, v, &tangents);
  const Vec got = mlp.jvp_input_grad(cache, tangents, u);

  // finite differences of g(in) = u^T (d out / d in) v
  const double h = 1e-5;
  Vec fd(n_in);
  for (int i = 0; i < n_in; ++i) {
    Vec ip = in, im = in;
    ip[i] += h;
    im[i] -= h;
    Mlp::Cache cp, cm;
    mlp.forward_cached(ip, cp);
    mlp.forward_cached(im, cm);
    fd[i] = (u.dot(mlp.jvp(cp, v)) - u.dot(mlp.jvp(cm, v))) / (2.0 * h);
  }
  CHECK((got - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("batched parameter gradients match finite differences") {
  auto mlp = small_mlp(0);
  Rng rng(9);
  const int B = 4;
  Mat X(mlp.arch().input_dim(), B);
  Mat target(mlp.arch().ambient_dim, B);
  for (int j = 0; j < B; ++j) {
    X.col(j) = rng.gaussian_vec(mlp.arch().input_dim());
    target.col(j) = rng.gaussian_vec(mlp.arch().ambient_dim);
  }
  const auto loss = [&](Mlp& net) {
    const Mat out = net.forward_batch(X);
    return (out - target).colwise().squaredNorm().sum() / B;
  };

  std::vector<Mat> Zs, As, gW;
  std::vector<Vec> gb;
  const Mat out = mlp.forward_batch(X, &Zs, &As);
  const Mat dOut = 2.0 * (out - target) / B;
  mlp.backprop_batch(Zs, As, dOut, gW, gb);

  const double h = 1e-6;
  Rng pick(21);
  for (int trial = 0; trial < 12; ++trial) {
    const auto l = pick.below(mlp.weights.size());
    const auto i = static_cast<Eigen::Index>(pick.below(mlp.weights[l].rows()));
    const auto j = static_cast<Eigen::Index>(pick.below(mlp.weights[l].cols()));
    Mlp plus = mlp, minus = mlp;
    plus.weights[l](i, j) += h;
    minus.weights[l](i, j) -= h;
    const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
    CHECK(gW[l](i, j) == doctest::Approx(fd).epsilon(1e-4));
  }
}

// --- training ----------------------------------------------------------------

TEST_CASE("zero training steps returns the initialization unchanged") {
  const Batch data = Batch::Zero(32, 2);
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.seed = 5;
  const auto model = train_score_model(data, Schedule(), std::nullopt, cfg);
  CHECK(model->final_loss == model->initial_loss);
  CHECK(model->steps_trained == 0);
}

TEST_CASE("training is bit-reproducible from the seed") {
  Architecture arch;
  arch.hidden = {32, 32};
  arch.fourier_features = 4;
  const auto data = manifolds::sample_manifold(manifolds::make_isotropic_gaussian(2), 64, 3);
  TrainConfig cfg;
  cfg.steps = 50;
  cfg.batch_size = 16;
  cfg.seed = 11;
  const auto m1 = train_score_model(data.points, Schedule(), std::nullopt, cfg, &arch);
  const auto m2 = train_score_model(data.points, Schedule(), std::nullopt, cfg, &arch);
  CHECK((m1->mlp().flatten_params() - m2->mlp().flatten_params()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training on a point cloud at the origin concentrates samples there") {
  // 256 copies of the origin; the optimal score is -x / sigma^2
  const Batch data = Batch::Zero(256, 2);
  Architecture arch;
  arch.hidden = {64, 64};
  arch.fourier_features = 8;
  TrainConfig cfg;
  cfg.steps = 2000;
  cfg.batch_size = 128;
  cfg.seed = 1;
  const Schedule sched;
  const auto model = train_score_model(data, sched, std::nullopt, cfg, &arch);
  CHECK(model->final_loss < model->initial_loss);

  diffusion::SampleOptions opt;
  opt.kind = diffusion::SamplerKind::ode;
  opt.steps = 100;
  const auto run = diffusion::sample_reverse(*model, 64, opt, 5);
  CHECK(run.samples.rowwise().norm().mean() < 0.1);

  // learned score close to the analytic one on a grid
  const AnalyticMixtureScore exact(
      ManifoldSpec(2, {manifolds::make_point_mass(Vec::Zero(2), 1.0)}), sched);
  double worst = 0.0;
  for (double gx = -0.5; gx <= 0.5; gx += 0.25) {
    for (double gy = -0.5; gy <= 0.5; gy += 0.25) {
      Vec x(2);
      x << gx, gy;
      const Vec got = model->score(x, 0.5);
      const Vec want = exact.score(x, 0.5);
      worst = std::max(worst, (got - want).norm() / std::max(1.0, want.norm()));
    }
  }
  CHECK(worst < 0.25);
}

TEST_CASE("training rejects malformed inputs") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train_score_model(Batch(0, 2), Schedule(), std::nullopt, cfg),
                  std::invalid_argument);
  Batch bad = Batch::Zero(4, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_score_model(bad, Schedule(), std::nullopt, cfg),
                  std::invalid_argument);
  const Batch ok = Batch::Zero(4, 2);
  const Batch cond = Batch::Zero(3, 2);
  CHECK_THROWS_AS(train_score_model(ok, Schedule(), cond, cfg), std::invalid_argument);
}

// --- divergence ----------------------------------------------------------------

TEST_CASE("exact divergence of a point mass is -d / sigma^2") {
  Vec x0 = Vec::Zero(3);
  const ManifoldSpec spec(3, {manifolds::make_point_mass(x0, 1.0)});
  const Schedule sched;
  const AnalyticMixtureScore model(spec, sched);
  Rng rng(2);
  for (double t : {0.05, 0.3, 0.9}) {
    const Vec x = rng.gaussian_vec(3);
    const double got = score_divergence(model, x, t, Vec(), TraceMode::exact);
    CHECK(got == doctest::Approx(-3.0 / sched.sigma2(t)).epsilon(1e-12));
  }
}

TEST_CASE("exact divergence agrees with finite differences of eval_score") {
  const auto spec = two_atoms();
  const AnalyticMixtureScore model(spec, Schedule());
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = rng.gaussian_vec(2);
    const double t = rng.uniform_open_closed(0.1, 1.0);
    const double got = score_divergence(model, x, t, Vec(), TraceMode::exact);
    const double h = 1e-6;
    double fd = 0.0;
    for (int i = 0; i < 2; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd += (model.score(xp, t)[i] - model.score(xm, t)[i]) / (2.0 * h);
    }
    CHECK(std::abs(got - fd) <= 1e-3 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("hutchinson is deterministic per seed and unbiased over seeds") {
  const auto spec = two_atoms();
  const AnalyticMixtureScore model(spec, Schedule());
  Vec x(2);
  x << 0.3, 0.4;
  const double t = 0.2;
  CHECK(score_divergence(model, x, t, Vec(), TraceMode::hutchinson, 1, 9) ==
        score_divergence(model, x, t, Vec(), TraceMode::hutchinson, 1, 9));
  CHECK_THROWS_AS(score_divergence(model, x, t, Vec(), TraceMode::hutchinson, 0, 1),
                  std::invalid_argument);

  const double exact = score_divergence(model, x, t, Vec(), TraceMode::exact);
  std::vector<double> estimates;
  for (int seed = 0; seed < 100; ++seed)
    estimates.push_back(score_divergence(model, x, t, Vec(), TraceMode::hutchinson, 8, seed));
  const double mean = stats::mean(estimates);
  const double se = stats::sample_std(estimates) / std::sqrt(100.0);
  CHECK(std::abs(mean - exact) <= 3.0 * std::max(se, 1e-12));
}

// --- conditioning gradients ----------------------------------------------------

TEST_CASE("tape gradient of a constant objective is zero") {
  Mat mean_map = Mat::Identity(2, 2);
  const LinearConditionalScore model(mean_map, Schedule());
  Vec c(2);
  c << 0.5, -0.25;
  CondTape tape(model, c);
  const auto s = tape.score(Vec::Zero(2), 0.5, false); // null branch only
  const auto obj = tape.squared_norm(s);
  CHECK(tape.grad(obj).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tape gradient matches the hand-derived linear-family formula") {
  Mat mean_map(2, 3);
  mean_map << 1.0, 0.5, 0.0, -0.5, 2.0, 1.0;
  const Schedule sched;
  const LinearConditionalScore model(mean_map, sched);
  Vec c(3);
  c << 0.2, -0.4, 1.0;
  Vec x(2);
  x << 0.9, -0.1;
  const double t = 0.35;

  CondTape tape(model, c);
  const auto obj = tape.squared_norm(tape.score(x, t, true));
  const Vec got = tape.grad(obj);

  // objective |s|^2 with s = -(x - psi M c)/sigma^2: grad = 2 (psi/sigma^2) M^T s
  const Vec s = model.score(x, t, c);
  const Vec want = 2.0 * (sched.psi(t) / sched.sigma2(t)) * (mean_map.transpose() * s);
  CHECK((got - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
}

TEST_CASE("tape rejects unconditional models and empty tapes") {
  const AnalyticMixtureScore model(manifolds::make_isotropic_gaussian(2), Schedule());
  CHECK_THROWS_AS(CondTape(model, Vec::Zero(0)), std::invalid_argument);

  Mat mean_map = Mat::Identity(2, 2);
  const LinearConditionalScore linear(mean_map, Schedule());
  CondTape tape(linear, Vec::Ones(2));
  CHECK_THROWS_AS(tape.grad(CondTape::ScalId{0}), std::logic_error);
}

TEST_CASE("conditioning gradient of a trained model matches finite differences") {
  // small conditional net; objective |s(x,t,c)|^2
  const auto data = manifolds::sample_manifold(manifolds::make_isotropic_gaussian(2), 64, 3);
  Batch cond(64, 2);
  Rng crng(5);
  for (int i = 0; i < 64; ++i) cond.row(i) = crng.gaussian_vec(2).transpose();
  Architecture arch;
  arch.hidden = {24, 24};
  arch.fourier_features = 4;
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.batch_size = 16;
  cfg.seed = 8;
  const auto model = train_score_model(data.points, Schedule(), cond, cfg, &arch);

  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = rng.gaussian_vec(2);
    const Vec c = rng.gaussian_vec(2);
    const double t = rng.uniform_open_closed(0.05, 1.0);

    CondTape tape(*model, c);
    const auto obj = tape.squared_norm(tape.score(x, t, true));
    const Vec got = tape.grad(obj);

    const double h = 1e-5;
    Vec fd(2);
    for (int i = 0; i < 2; ++i) {
      Vec cp = c, cm = c;
      cp[i] += h;
      cm[i] -= h;
      fd[i] = (model->score(x, t, cp).squaredNorm() - model->score(x, t, cm).squaredNorm()) /
              (2.0 * h);
    }
    worst = std::max(worst, (got - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("tape handles cfg combinations and trace terms") {
  Mat mean_map(2, 2);
  mean_map << 1.0, 0.0, 0.0, 1.0;
  const Schedule sched;
  const LinearConditionalScore model(mean_map, sched);
  Vec c(2);
  c << 0.7, -0.2;
  Vec x(2);
  x << 0.1, 0.4;
  const double t = 0.5;
  const double lambda = 2.5;

  CondTape tape(model, c);
  const auto scfg = tape.cfg_score(x, t, lambda);
  const auto obj = tape.squared_norm(scfg);
  const Vec got = tape.grad(obj);

  // d|s_cfg|^2/dc = 2 lambda (psi/sigma^2) M^T s_cfg for the linear family
  const Vec s_cfg = diffusion::cfg_score(model, x, t, c, {lambda});
  const Vec want =
      2.0 * lambda * (sched.psi(t) / sched.sigma2(t)) * (mean_map.transpose() * s_cfg);
  CHECK((got - want).norm() <= 1e-12 * std::max(1.0, want.norm()));

  // trace node: Jacobian of the linear family is constant in c
  CondTape tape2(model, c);
  Vec e0 = Vec::Zero(2);
  e0[0] = 1.0;
  const auto tr = tape2.dot(tape2.cfg_score_dx(x, t, lambda, e0), e0);
  CHECK(tape2.value(tr) == doctest::Approx(-1.0 / sched.sigma2(t)));
  CHECK(tape2.grad(tr).cwiseAbs().maxCoeff() == 0.0);
}

// --- checkpoints -----------------------------------------------------------------

TEST_CASE("checkpoint round trip is bit-exact on 100 probes") {
  const auto data = manifolds::sample_manifold(manifolds::make_isotropic_gaussian(2), 32, 1);
  Architecture arch;
  arch.hidden = {16, 16};
  arch.fourier_features = 2;
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 8;
  cfg.seed = 2;
  const auto model = train_score_model(data.points, Schedule(), std::nullopt, cfg, &arch);

  const auto path = std::filesystem::temp_directory_path() / "lidlab_test_ckpt.bin";
  save_checkpoint(*model, path);
  const auto loaded = load_checkpoint(path);

  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.gaussian_vec(2);
    const double t = rng.uniform_open_closed(1e-3, 1.0);
    const Vec a = model->score(x, t);
    const Vec b = loaded->score(x, t);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects corruption and dimension mismatches") {
  const auto data = manifolds::sample_manifold(manifolds::make_isotropic_gaussian(2), 32, 1);
  Architecture arch;
  arch.hidden = {8};
  arch.fourier_features = 2;
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.seed = 3;
  const auto model = train_score_model(data.points, Schedule(), std::nullopt, cfg, &arch);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "lidlab_test_ckpt2.bin";
  save_checkpoint(*model, path);

  CHECK_THROWS(load_checkpoint(path, 5)); // configured dim differs

  // truncate the file: no partial model may come back
  const auto truncated = dir / "lidlab_test_ckpt2_trunc.bin";
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(truncated, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS(load_checkpoint(truncated));
  std::filesystem::remove(path);
  std::filesystem::remove(truncated);
}
