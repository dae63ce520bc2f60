#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "imsp/data/manifest.hpp"
#include "imsp/experiment/config.hpp"
#include "imsp/pca/basis.hpp"
#include "imsp/pin/defense.hpp"
#include "imsp/pin/reinforce.hpp"
#include "imsp/recognizer/recognizer.hpp"

namespace imsp::exp {

class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Logger = std::function<void(const std::string&)>;

struct RecognizerSummary {
  double train_accuracy = 0.0;
  int epochs = 0;
  double threshold = 0.0;
  double calibration_tpr = 0.0;
};

/// Stage-ordered artifact store under cfg.out_dir. Each stage is keyed by a
/// hash of its inputs; a stage whose stamp matches is loaded, not rebuilt.
class Workbench {
 public:
  explicit Workbench(ExperimentConfig cfg, Logger log = {});

  const ExperimentConfig& config() const { return cfg_; }
  const std::filesystem::path& dir() const { return cfg_.out_dir; }

  // build=false turns a missing or stale artifact into MissingArtifact.
  const data::Dataset& dataset(bool build = true);
  const rec::RecognizerModel& recognizer(bool build = true);
  const pca::EigenBasis& basis(bool build = true);
  const pin::PinModel& pin(bool build = true);
  // Same recipe with the denoising front end forced on (ablation).
  const pin::PinModel& pin_with_dae(bool build = true);

  const RecognizerSummary& recognizer_summary() const { return rec_summary_; }
  const std::vector<pin::EpochStats>& reward_curve() const { return reward_curve_; }

  std::uint64_t data_hash();
  std::uint64_t recognizer_hash();
  std::uint64_t basis_hash();
  std::uint64_t pin_hash();

  void log(const std::string& msg) const;

 private:
  pin::PinModel train_pin_stage(const pin::PinConfig& pc, const std::filesystem::path& sub, bool build,
                                std::vector<pin::EpochStats>* curve);

  ExperimentConfig cfg_;
  Logger log_;
  std::optional<data::Dataset> data_;
  std::optional<rec::RecognizerModel> recognizer_;
  std::optional<pca::EigenBasis> basis_;
  std::optional<pin::PinModel> pin_;
  std::optional<pin::PinModel> pin_dae_;
  RecognizerSummary rec_summary_;
  std::vector<pin::EpochStats> reward_curve_;
};

// Positive pairs among the calibration split, used for the threshold.
std::vector<double> calibration_scores(const data::Dataset& data, const rec::RecognizerModel& model);

}  // namespace imsp::exp
