#include "lidlab/scorenet/train.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lidlab::scorenet {

void TrainConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
  if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (!(t_min > 0.0 && t_min < 1.0))
    throw std::invalid_argument("TrainConfig: t_min must lie in (0, 1)");
  if (cond_dropout < 0.0 || cond_dropout > 1.0)
    throw std::invalid_argument("TrainConfig: cond_dropout must lie in [0, 1]");
}

TrainedScoreNet::TrainedScoreNet(Architecture arch, diffusion::Schedule schedule)
    : mlp_(std::move(arch)), schedule_(std::move(schedule)) {}

std::string TrainedScoreNet::describe() const {
  std::ostringstream ss;
  ss << "trained score net d=" << ambient_dim() << " m=" << cond_dim()
     << " steps=" << steps_trained;
  return ss.str();
}

Vec TrainedScoreNet::assemble_input(const Vec& x, double t, const Vec& c) const {
  const auto& a = mlp_.arch();
  Vec in(a.input_dim());
  in.head(a.ambient_dim) = x;
  in.segment(a.ambient_dim, 2 * a.fourier_features) = time_features(t, a.fourier_features);
  if (a.cond_dim > 0)
    in.tail(a.cond_dim) = c.size() ? c : Vec(Vec::Zero(a.cond_dim));
  return in;
}

Vec TrainedScoreNet::score_impl(const Vec& x, double t, const Vec& c) const {
  return -mlp_.forward(assemble_input(x, t, c)) / schedule_.sigma(t);
}

Vec TrainedScoreNet::score_dx_impl(const Vec& x, double t, const Vec& c, const Vec& v) const {
  Mlp::Cache cache;
  mlp_.forward_cached(assemble_input(x, t, c), cache);
  Vec vin = Vec::Zero(mlp_.arch().input_dim());
  vin.head(ambient_dim()) = v;
  return -mlp_.jvp(cache, vin) / schedule_.sigma(t);
}

Vec TrainedScoreNet::score_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u) const {
  if (!supports_cond_grad())
    throw std::logic_error("score_vjp_c: model is unconditional");
  check_inputs(x, t, c);
  Mlp::Cache cache;
  mlp_.forward_cached(assemble_input(x, t, c), cache);
  const Vec gin = mlp_.input_vjp(cache, u);
  return -gin.tail(cond_dim()) / schedule_.sigma(t);
}

Vec TrainedScoreNet::score_dx_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u,
                                    const Vec& v) const {
  if (!supports_cond_grad())
    throw std::logic_error("score_dx_vjp_c: model is unconditional");
  check_inputs(x, t, c);
  Mlp::Cache cache;
  Mlp::TangentCache tangents;
  mlp_.forward_cached(assemble_input(x, t, c), cache);
  Vec vin = Vec::Zero(mlp_.arch().input_dim());
  vin.head(ambient_dim()) = v;
  mlp_.jvp(cache, vin, &tangents);
  const Vec gin = mlp_.jvp_input_grad(cache, tangents, u);
  return -gin.tail(cond_dim()) / schedule_.sigma(t);
}

namespace {

struct AdamState {
  std::vector<Mat> mW, vW;
  std::vector<Vec> mb, vb;
  int t = 0;

  explicit AdamState(const Mlp& mlp) {
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
      mW.push_back(Mat::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
      vW.push_back(Mat::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
      mb.push_back(Vec::Zero(mlp.biases[l].size()));
      vb.push_back(Vec::Zero(mlp.biases[l].size()));
    }
  }

  void step(Mlp& mlp, const std::vector<Mat>& gW, const std::vector<Vec>& gb, double lr) {
    static constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t l = 0; l < mW.size(); ++l) {
      mW[l] = b1 * mW[l] + (1.0 - b1) * gW[l];
      vW[l] = b2 * vW[l] + (1.0 - b2) * gW[l].cwiseProduct(gW[l]);
      mlp.weights[l].array() -=
          lr * (mW[l].array() / c1) / ((vW[l].array() / c2).sqrt() + eps);
      mb[l] = b1 * mb[l] + (1.0 - b1) * gb[l];
      vb[l] = b2 * vb[l] + (1.0 - b2) * gb[l].cwiseProduct(gb[l]);
      mlp.biases[l].array() -=
          lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
    }
  }
};

// Builds network inputs and targets for one noised batch; columns are samples.
struct NoisedBatch {
  Mat inputs;
  Mat targets;
};

NoisedBatch make_noised_batch(const Batch& data, const std::optional<Batch>& cond,
                              const Architecture& arch, const diffusion::Schedule& schedule,
                              double t_min, double cond_dropout, int batch_size, Rng& rng) {
  const int d = arch.ambient_dim;
  NoisedBatch nb;
  nb.inputs.resize(arch.input_dim(), batch_size);
  nb.targets.resize(d, batch_size);
  for (int j = 0; j < batch_size; ++j) {
    const auto row = static_cast<Eigen::Index>(rng.below(data.rows()));
    const double t = rng.uniform_open_closed(t_min, 1.0);
    const Vec eps = rng.gaussian_vec(d);
    const Vec x0 = data.row(row).transpose();
    nb.inputs.col(j).head(d) = schedule.psi(t) * x0 + schedule.sigma(t) * eps;
    nb.inputs.col(j).segment(d, 2 * arch.fourier_features) =
        time_features(t, arch.fourier_features);
    if (arch.cond_dim > 0) {
      const bool drop = rng.uniform() < cond_dropout;
      nb.inputs.col(j).tail(arch.cond_dim) =
          (cond && !drop) ? Vec(cond->row(row).transpose()) : Vec(Vec::Zero(arch.cond_dim));
    }
    nb.targets.col(j) = eps;
  }
  return nb;
}

} // namespace

double dsm_loss(const TrainedScoreNet& model, const Batch& data,
                const std::optional<Batch>& cond, double t_min, std::uint64_t seed,
                int n_eval) {
  Rng rng(seed);
  const auto nb = make_noised_batch(data, cond, model.mlp().arch(), model.schedule(), t_min,
                                    /*cond_dropout=*/0.0, n_eval, rng);
  const Mat out = model.mlp().forward_batch(nb.inputs);
  return (out - nb.targets).colwise().squaredNorm().mean();
}

std::shared_ptr<TrainedScoreNet> train_score_model(
    const Batch& data, const diffusion::Schedule& schedule,
    const std::optional<Batch>& cond, const TrainConfig& cfg,
    const Architecture* arch_override) {
  cfg.validate();
  if (data.rows() == 0) throw std::invalid_argument("train_score_model: empty dataset");
  if (!data.allFinite())
    throw std::invalid_argument("train_score_model: dataset contains non-finite values");
  if (cond && cond->rows() != data.rows())
    throw std::invalid_argument("train_score_model: conditioning row count (" +
                                std::to_string(cond->rows()) + ") does not match data (" +
                                std::to_string(data.rows()) + ")");

  Architecture arch;
  if (arch_override) {
    arch = *arch_override;
  } else {
    arch.hidden = {256, 256, 256};
    arch.fourier_features = 8;
  }
  arch.ambient_dim = static_cast<int>(data.cols());
  arch.cond_dim = cond ? static_cast<int>(cond->cols()) : 0;

  auto model = std::make_shared<TrainedScoreNet>(arch, schedule);
  model->seed = cfg.seed;

  Rng master(cfg.seed);
  Rng init_rng = master.fork(1);
  model->mlp().init_params(init_rng);

  const std::uint64_t eval_seed = master.fork(2).raw();
  model->initial_loss = dsm_loss(*model, data, cond, cfg.t_min, eval_seed);

  Rng train_rng = master.fork(3);
  AdamState adam(model->mlp());
  std::vector<Mat> Zs, As, gW;
  std::vector<Vec> gb;
  for (int step = 0; step < cfg.steps; ++step) {
    const auto nb = make_noised_batch(data, cond, arch, schedule, cfg.t_min,
                                      cond ? cfg.cond_dropout : 0.0, cfg.batch_size,
                                      train_rng);
    const Mat out = model->mlp().forward_batch(nb.inputs, &Zs, &As);
    const Mat dOut = 2.0 * (out - nb.targets) / static_cast<double>(cfg.batch_size);
    model->mlp().backprop_batch(Zs, As, dOut, gW, gb);
    adam.step(model->mlp(), gW, gb, cfg.learning_rate);
  }

  model->steps_trained = cfg.steps;
  model->final_loss = dsm_loss(*model, data, cond, cfg.t_min, eval_seed);
  if (!std::isfinite(model->final_loss))
    throw std::runtime_error("train_score_model: training diverged (non-finite loss)");
  return model;
}

} // namespace lidlab::scorenet
