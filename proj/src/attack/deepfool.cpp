#include "imsp/attack/deepfool.hpp"

#include <stdexcept>

#include "imsp/data/noise.hpp"

namespace imsp::attack {

AttackResult deepfool_similarity(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                                 double tau, const DeepFoolConfig& cfg, SeededRng* rng) {
  if (cfg.max_iter < 1) throw std::invalid_argument("deepfool: max_iter must be >= 1");
  Vector grad;
  double s = target.attack_score(probe, ref_embedding, rng, &grad);
  if (is_adversarial(s, tau, cfg.objective))
    throw std::invalid_argument("deepfool: pair is already misclassified");

  AttackResult r;
  r.adversarial = probe;
  r.gradient_queries = 1;
  bool crossed = false;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double f = s - tau;
    const double g2 = grad.squaredNorm();
    if (g2 == 0.0) {
      r.note = "zero gradient";
      break;
    }
    // A dodging step must land strictly at or below tau, impersonation above.
    const Vector step = -(1.0 + cfg.overshoot) * (f / g2) * grad;
    r.adversarial = data::clip01(r.adversarial + step);
    s = target.attack_score(r.adversarial, ref_embedding, rng, &grad);
    ++r.gradient_queries;
    if (is_adversarial(s, tau, cfg.objective)) {
      crossed = true;
      break;
    }
  }
  if (!crossed) {
    r.flagged = true;
    if (r.note.empty()) r.note = "no crossing within max_iter";
  }
  Vector eta = r.adversarial - probe;
  r.intensity_pre_clip = eta.norm() / probe.norm();
  if (cfg.intensity_cap > 0.0 && r.intensity_pre_clip > cfg.intensity_cap) {
    eta *= cfg.intensity_cap / r.intensity_pre_clip;
    r.adversarial = data::clip01(probe + eta);
    r.flagged = true;
    r.note = "perturbation capped";
  }
  eta = r.adversarial - probe;
  r.intensity_post_clip = eta.norm() / probe.norm();
  r.linf = eta.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace imsp::attack
