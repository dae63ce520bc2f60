#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imsp/attack/blackbox.hpp"
#include "imsp/attack/sticker.hpp"
#include "imsp/data/manifest.hpp"
#include "imsp/pin/config.hpp"
#include "imsp/recognizer/recognizer.hpp"

namespace imsp::exp {

inline constexpr int kConfigSchemaVersion = 1;

struct SubspaceConfig {
  int samples = 2000;          // noise draws per region and pair
  double intensity = 0.04;
  int components = 16;         // top-K classical projection, ~1.6% of the pixels
  int bins = 40;
};

struct AttackSuiteConfig {
  double intensity = 0.04;
  int ifgsm_steps = 10;
  int pgd_steps = 10;
  int pgd_high_steps = 100;
  int deepfool_iters = 50;
  double deepfool_overshoot = 0.02;
  int table_pairs = 0;               // 0 = every eval pair
  std::vector<std::string> attacks{"fgsm", "ifgsm", "pgd", "deepfool"};
  std::string protocol = "both";     // offline | online | both
  int classical_small_k = 8;
  int classical_large_k = 256;
  attack::StickerSpec sticker;
  int sticker_gallery = 100;
  attack::BlackBoxConfig blackbox;
  int blackbox_pairs = 50;
  double blackbox_threshold = 0.2;  // fixed decision similarity for the black-box study
  // Gradient audit.
  int audit_pairs = 200;
  std::vector<double> sweep{0.04, 0.06, 0.08, 0.1, 0.2, 0.3, 0.5, 0.75};
  double search_epsilon = 0.01;
  double search_threshold = 0.0;   // stricter decision for the random-search pairing
  long search_samples = 100000;
  int search_pairs = 6;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  data::DatasetConfig data;
  rec::RecognizerConfig recognizer;
  pin::PinConfig pin;
  int basis_components = 256;
  int eval_positive = 1000;
  int eval_negative = 1000;
  std::uint64_t pair_seed = 23;
  std::uint64_t recognizer_seed = 5;
  std::uint64_t eval_seed = 31;
  std::uint64_t attack_seed = 37;
  double calibration_tpr = 0.99;
  SubspaceConfig subspace;
  AttackSuiteConfig attacks;
  std::filesystem::path out_dir = "runs/default";
  unsigned jobs = 0;

  // Applies --seed: every seed is derived from one value.
  void reseed(std::uint64_t seed);
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

// Hash of the canonical JSON form minus output location and job count.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace imsp::exp
