#pragma once

#include <memory>
#include <optional>

#include "lidlab/core/types.hpp"
#include "lidlab/scorenet/mlp.hpp"
#include "lidlab/scorenet/score_model.hpp"

namespace lidlab::scorenet {

struct TrainConfig {
  int steps = 20000;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double t_min = 1e-4;      // training times are uniform on (t_min, 1]
  double cond_dropout = 0.1; // probability of replacing c by the null embedding

  void validate() const;
};

/// Score model backed by an epsilon-predicting network:
/// s(x, t, c) = -net([x; fourier(t); c]) / sigma(t), with the null condition
/// embedded as the zero vector.
class TrainedScoreNet : public ScoreModel {
 public:
  TrainedScoreNet(Architecture arch, diffusion::Schedule schedule);

  Kind kind() const override { return Kind::trained; }
  int ambient_dim() const override { return mlp_.arch().ambient_dim; }
  int cond_dim() const override { return mlp_.arch().cond_dim; }
  const diffusion::Schedule& schedule() const override { return schedule_; }
  bool supports_cond_grad() const override { return cond_dim() > 0; }
  std::string describe() const override;

  Vec score_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u) const override;
  Vec score_dx_vjp_c(const Vec& x, double t, const Vec& c, const Vec& u,
                     const Vec& v) const override;

  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

  // training provenance, persisted in checkpoints
  std::uint64_t seed = 0;
  int steps_trained = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;

 protected:
  Vec score_impl(const Vec& x, double t, const Vec& c) const override;
  Vec score_dx_impl(const Vec& x, double t, const Vec& c, const Vec& v) const override;

 private:
  Vec assemble_input(const Vec& x, double t, const Vec& c) const;

  Mlp mlp_;
  diffusion::Schedule schedule_;
};

/// Denoising score matching: draws (x0, t, eps), forms x_t = psi x0 + sigma eps
/// and fits net(x_t, t, c) to eps with Adam. Bit-reproducible from cfg.seed.
std::shared_ptr<TrainedScoreNet> train_score_model(
    const Batch& data, const diffusion::Schedule& schedule,
    const std::optional<Batch>& cond, const TrainConfig& cfg,
    const Architecture* arch_override = nullptr);

/// Mean epsilon-prediction error of the model on a fixed noised batch; the
/// held-out loss reported by training.
double dsm_loss(const TrainedScoreNet& model, const Batch& data,
                const std::optional<Batch>& cond, double t_min, std::uint64_t seed,
                int n_eval = 512);

} // namespace lidlab::scorenet
