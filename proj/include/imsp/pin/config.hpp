#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace imsp::pin {

enum class DefenseMode { stochastic, deterministic, reparam_backward, bpda_backward };

std::string to_string(DefenseMode mode);
DefenseMode parse_defense_mode(const std::string& name);

struct PinConfig {
  double lambda = 0.015;        // weight of ||q||_0 in the reward
  int samples = 8;              // Monte Carlo masks per image
  double noise_intensity = 0.04;
  int epochs = 40;
  int batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  int decay_epochs = 20;
  int components = 256;         // N
  bool dae_enabled = false;
  int dae_epochs = 30;
  DefenseMode mode = DefenseMode::stochastic;
  int eval_samples = 1;         // masks averaged per defended image at evaluation
  std::uint64_t seed = 11;
  // Agent trunk widths.
  int conv1 = 16;
  int conv2 = 32;
  int hidden = 256;

  void validate() const;
};

nlohmann::json to_json(const PinConfig& cfg);
PinConfig pin_config_from_json(const nlohmann::json& j);

struct EpochStats {
  int epoch = 0;
  double mean_reward = 0.0;
  double mean_l0_fraction = 0.0;
};

// CSV columns: epoch, mean_reward, mean_L0_fraction.
void write_reward_curve(const std::filesystem::path& path, const std::vector<EpochStats>& curve);
std::vector<EpochStats> read_reward_curve(const std::filesystem::path& path);

}  // namespace imsp::pin
