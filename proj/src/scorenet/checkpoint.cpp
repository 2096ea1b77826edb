#include "lidlab/scorenet/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lidlab::scorenet {

void save_checkpoint(const TrainedScoreNet& model, const std::filesystem::path& path) {
  nlohmann::json manifest;
  const auto& arch = model.mlp().arch();
  manifest["format"] = 1;
  manifest["ambient_dim"] = arch.ambient_dim;
  manifest["cond_dim"] = arch.cond_dim;
  manifest["hidden"] = arch.hidden;
  manifest["fourier_features"] = arch.fourier_features;
  manifest["schedule"] = {{"beta_min", model.schedule().beta_min()},
                          {"beta_max", model.schedule().beta_max()}};
  manifest["schedule_id"] = model.schedule().id();
  manifest["seed"] = model.seed;
  manifest["steps_trained"] = model.steps_trained;
  manifest["initial_loss"] = model.initial_loss;
  manifest["final_loss"] = model.final_loss;
  manifest["param_count"] = static_cast<std::int64_t>(model.mlp().param_count());
  const std::string mtext = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << "lidlab-checkpoint v1\n" << mtext.size() << "\n" << mtext;
  const Vec params = model.mlp().flatten_params();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

std::shared_ptr<TrainedScoreNet> load_checkpoint(const std::filesystem::path& path,
                                                 std::optional<int> expected_ambient_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "lidlab-checkpoint v1")
    throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
  std::size_t mlen = 0;
  in >> mlen;
  in.get();
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw std::runtime_error("load_checkpoint: truncated manifest in " + path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mtext);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_checkpoint: corrupt manifest in " + path.string() + ": " +
                             e.what());
  }

  Architecture arch;
  arch.ambient_dim = manifest.at("ambient_dim").get<int>();
  arch.cond_dim = manifest.at("cond_dim").get<int>();
  arch.hidden = manifest.at("hidden").get<std::vector<int>>();
  arch.fourier_features = manifest.at("fourier_features").get<int>();
  if (expected_ambient_dim && *expected_ambient_dim != arch.ambient_dim)
    throw std::runtime_error("load_checkpoint: checkpoint ambient_dim " +
                             std::to_string(arch.ambient_dim) + " does not match configured " +
                             std::to_string(*expected_ambient_dim));

  diffusion::Schedule schedule(manifest.at("schedule").at("beta_min").get<double>(),
                               manifest.at("schedule").at("beta_max").get<double>());
  auto model = std::make_shared<TrainedScoreNet>(arch, schedule);
  model->seed = manifest.at("seed").get<std::uint64_t>();
  model->steps_trained = manifest.at("steps_trained").get<int>();
  model->initial_loss = manifest.at("initial_loss").get<double>();
  model->final_loss = manifest.at("final_loss").get<double>();

  const auto expected = manifest.at("param_count").get<std::int64_t>();
  if (expected != model->mlp().param_count())
    throw std::runtime_error("load_checkpoint: parameter count mismatch in " + path.string());
  Vec params(expected);
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(expected * sizeof(double)))
    throw std::runtime_error("load_checkpoint: truncated parameters in " + path.string());
  model->mlp().set_params(params);
  return model;
}

} // namespace lidlab::scorenet
