#include "imsp/pin/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace imsp::pin {

std::string to_string(DefenseMode mode) {
  switch (mode) {
    case DefenseMode::stochastic: return "stochastic";
    case DefenseMode::deterministic: return "deterministic";
    case DefenseMode::reparam_backward: return "reparam_backward";
    case DefenseMode::bpda_backward: return "bpda_backward";
  }
  return "?";
}

DefenseMode parse_defense_mode(const std::string& name) {
  for (auto m : {DefenseMode::stochastic, DefenseMode::deterministic, DefenseMode::reparam_backward,
                 DefenseMode::bpda_backward})
    if (to_string(m) == name) return m;
  throw std::invalid_argument(fmt::format("unknown defense mode '{}'", name));
}

void PinConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("pin: lambda must be >= 0");
  if (samples < 1) throw std::invalid_argument("pin: samples must be >= 1");
  if (noise_intensity < 0.0) throw std::invalid_argument("pin: noise intensity must be >= 0");
  if (epochs < 0 || batch < 1 || components < 1 || eval_samples < 1)
    throw std::invalid_argument("pin: epochs, batch, components and eval_samples out of range");
}

nlohmann::json to_json(const PinConfig& c) {
  return {{"lambda", c.lambda},
          {"samples", c.samples},
          {"noise_intensity", c.noise_intensity},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"decay_epochs", c.decay_epochs},
          {"components", c.components},
          {"dae_enabled", c.dae_enabled},
          {"dae_epochs", c.dae_epochs},
          {"mode", to_string(c.mode)},
          {"eval_samples", c.eval_samples},
          {"seed", c.seed},
          {"conv1", c.conv1},
          {"conv2", c.conv2},
          {"hidden", c.hidden}};
}

PinConfig pin_config_from_json(const nlohmann::json& j) {
  PinConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.samples = j.value("samples", c.samples);
  c.noise_intensity = j.value("noise_intensity", c.noise_intensity);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.decay_epochs = j.value("decay_epochs", c.decay_epochs);
  c.components = j.value("components", c.components);
  c.dae_enabled = j.value("dae_enabled", c.dae_enabled);
  c.dae_epochs = j.value("dae_epochs", c.dae_epochs);
  c.mode = parse_defense_mode(j.value("mode", to_string(c.mode)));
  c.eval_samples = j.value("eval_samples", c.eval_samples);
  c.seed = j.value("seed", c.seed);
  c.conv1 = j.value("conv1", c.conv1);
  c.conv2 = j.value("conv2", c.conv2);
  c.hidden = j.value("hidden", c.hidden);
  c.validate();
  return c;
}

void write_reward_curve(const std::filesystem::path& path, const std::vector<EpochStats>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << "epoch,mean_reward,mean_L0_fraction\n";
  for (const auto& e : curve) out << fmt::format("{},{:.10g},{:.10g}\n", e.epoch, e.mean_reward, e.mean_l0_fraction);
}

std::vector<EpochStats> read_reward_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::string line;
  std::getline(in, line);
  if (line != "epoch,mean_reward,mean_L0_fraction")
    throw std::runtime_error(fmt::format("{}: unexpected reward curve header", path.string()));
  std::vector<EpochStats> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    EpochStats e;
    char c1 = 0, c2 = 0;
    if (!(ss >> e.epoch >> c1 >> e.mean_reward >> c2 >> e.mean_l0_fraction) || c1 != ',' || c2 != ',')
      throw std::runtime_error(fmt::format("{}: malformed row '{}'", path.string(), line));
    out.push_back(e);
  }
  return out;
}

}  // namespace imsp::pin
