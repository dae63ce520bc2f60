#pragma once

#include <array>
#include <vector>

namespace imsp::rec {

inline constexpr std::array<double, 3> kFarLevels{0.1, 0.01, 0.001};

struct RocPoint {
  double threshold;  // predict positive when score > threshold
  double tpr;
  double fpr;
};

struct VerificationMetrics {
  double eer = 0.0;
  double eer_threshold = 0.0;
  std::array<double, 3> tar_at_far{};  // at kFarLevels
  double auc = 0.0;
  bool low_confidence = false;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Operating points for the thresholds {-inf} U scores, ascending threshold.
std::vector<RocPoint> roc_curve(const std::vector<double>& pos, const std::vector<double>& neg);

VerificationMetrics compute_metrics(const std::vector<double>& pos, const std::vector<double>& neg);

double tar_at_far(const std::vector<RocPoint>& roc, double far);

// Largest threshold that keeps at least `target_tpr` of `pos` strictly above
// it, placed midway between the last allowed rejection and the next score.
double calibrate_threshold(std::vector<double> pos, double target_tpr);

}  // namespace imsp::rec
