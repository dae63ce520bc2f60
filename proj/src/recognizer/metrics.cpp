#include "imsp/recognizer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace imsp::rec {

std::vector<RocPoint> roc_curve(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("roc_curve: empty score list");
  std::vector<double> p = pos;
  std::vector<double> n = neg;
  std::sort(p.begin(), p.end());
  std::sort(n.begin(), n.end());
  std::vector<double> thresholds;
  thresholds.reserve(p.size() + n.size() + 1);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), p.begin(), p.end());
  thresholds.insert(thresholds.end(), n.begin(), n.end());
  std::sort(thresholds.begin() + 1, thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> roc;
  roc.reserve(thresholds.size());
  std::size_t ip = 0;
  std::size_t in = 0;
  for (double t : thresholds) {
    while (ip < p.size() && p[ip] <= t) ++ip;
    while (in < n.size() && n[in] <= t) ++in;
    roc.push_back(RocPoint{t, static_cast<double>(p.size() - ip) / p.size(),
                           static_cast<double>(n.size() - in) / n.size()});
  }
  return roc;
}

double tar_at_far(const std::vector<RocPoint>& roc, double far) {
  // Walk from the strictest threshold (fpr 0) towards -inf (fpr 1).
  const RocPoint* below = nullptr;
  for (auto it = roc.rbegin(); it != roc.rend(); ++it) {
    if (it->fpr <= far) {
      below = &*it;
      continue;
    }
    if (!below) return 0.0;
    const double w = (far - below->fpr) / (it->fpr - below->fpr);
    return below->tpr + w * (it->tpr - below->tpr);
  }
  return below ? below->tpr : 0.0;
}

VerificationMetrics compute_metrics(const std::vector<double>& pos, const std::vector<double>& neg) {
  const auto roc = roc_curve(pos, neg);
  VerificationMetrics m;
  m.positives = pos.size();
  m.negatives = neg.size();
  m.low_confidence = pos.size() < 2 || neg.size() < 2;

  // FRR - FAR rises from -1 at -inf to +1 above every score.
  double prev_d = -1.0;
  for (std::size_t k = 0; k < roc.size(); ++k) {
    const double frr = 1.0 - roc[k].tpr;
    const double far = roc[k].fpr;
    const double d = frr - far;
    if (d >= 0.0) {
      if (d == 0.0 || k == 0) {
        m.eer = far;
        m.eer_threshold = roc[k].threshold;
      } else {
        const double w = -prev_d / (d - prev_d);
        const double far_prev = roc[k - 1].fpr;
        m.eer = far_prev + w * (far - far_prev);
        m.eer_threshold = std::isinf(roc[k - 1].threshold) ? roc[k].threshold
                                                           : roc[k - 1].threshold +
                                                                 w * (roc[k].threshold - roc[k - 1].threshold);
      }
      break;
    }
    prev_d = d;
  }

  for (std::size_t i = 0; i < kFarLevels.size(); ++i) m.tar_at_far[i] = tar_at_far(roc, kFarLevels[i]);

  double auc = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k)
    auc += (roc[k - 1].fpr - roc[k].fpr) * 0.5 * (roc[k - 1].tpr + roc[k].tpr);
  m.auc = auc;
  return m;
}

double calibrate_threshold(std::vector<double> pos, double target_tpr) {
  if (pos.empty()) throw std::invalid_argument("calibrate_threshold: no positive scores");
  if (target_tpr <= 0.0 || target_tpr > 1.0) throw std::invalid_argument("calibrate_threshold: bad target");
  std::sort(pos.begin(), pos.end());
  const auto allowed = static_cast<std::size_t>(std::floor((1.0 - target_tpr) * pos.size() + 1e-9));
  if (allowed == 0) return pos.front() - 1e-6;
  return 0.5 * (pos[allowed - 1] + pos[allowed]);
}

}  // namespace imsp::rec
