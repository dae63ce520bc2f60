#include "imsp/attack/blackbox.hpp"

#include <algorithm>
#include <cmath>

#include "imsp/data/noise.hpp"
#include "imsp/data/synthetic.hpp"

namespace imsp::attack {

DistortionTrace decision_blackbox(const AttackTarget& target, const Vector& probe, const Vector& ref_image,
                                  const Vector& ref_embedding, Objective objective, const BlackBoxConfig& cfg,
                                  SeededRng& rng) {
  SeededRng query_rng = rng.derive(1);
  SeededRng walk_rng = rng.derive(2);
  DistortionTrace trace;
  auto adversarial = [&](const Vector& x) {
    ++trace.queries;
    return is_adversarial(target.deployed_score(x, ref_embedding, &query_rng), target.threshold(), objective);
  };

  // Bootstrap.
  Vector start;
  if (objective == Objective::impersonation && adversarial(ref_image)) start = ref_image;
  for (int b = 0; b < cfg.bootstrap_budget && start.size() == 0; ++b) {
    Vector u(probe.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = walk_rng.uniform();
    const double w = std::min(1.0, 0.2 + 0.8 * b / std::max(1, cfg.bootstrap_budget / 4));
    const Vector cand = objective == Objective::impersonation ? Vector((1.0 - w) * u + w * ref_image)
                                                              : Vector((1.0 - w) * probe + w * u);
    if (adversarial(cand)) start = cand;
  }
  if (start.size() == 0) return trace;
  trace.started = true;

  // Pull the start toward the probe along the segment while it stays adversarial.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 10; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Vector cand = probe + mid * (start - probe);
    if (adversarial(cand)) hi = mid;
    else lo = mid;
  }
  Vector x = probe + hi * (start - probe);
  double mse = data::image_mse(x, probe);
  trace.points.push_back({0, mse, true});

  // Each iteration: a spherical step around the probe (same distance), then a
  // contraction toward it. Step sizes adapt to their own success rates.
  double step = cfg.step;
  double contraction = cfg.contraction;
  int sphere_ok = 0;
  int sphere_tried = 0;
  int contract_ok = 0;
  int contract_tried = 0;
  std::size_t next_cp = 0;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const Vector delta = x - probe;
    const double dist = delta.norm();
    Vector noise = gaussian_draw(walk_rng, static_cast<std::size_t>(probe.size()));
    noise -= (noise.dot(delta) / (dist * dist)) * delta;
    noise *= step * dist / noise.norm();
    Vector sphere = probe + (delta + noise) * (dist / (delta + noise).norm());
    sphere = data::clip01(sphere);
    ++sphere_tried;
    if (adversarial(sphere)) {
      ++sphere_ok;
      const Vector cand = data::clip01(Vector(probe + (1.0 - contraction) * (sphere - probe)));
      const double cand_mse = data::image_mse(cand, probe);
      ++contract_tried;
      if (cand_mse < mse && adversarial(cand)) {
        ++contract_ok;
        x = cand;
        mse = cand_mse;
      }
    }
    if (sphere_tried == cfg.adapt_window) {
      step *= static_cast<double>(sphere_ok) / sphere_tried > 0.5 ? 1.5 : 1.0 / 1.5;
      step = std::clamp(step, 1e-4, 1.0);
      if (contract_tried > 0) {
        contraction *= static_cast<double>(contract_ok) / contract_tried > 0.5 ? 1.5 : 1.0 / 1.5;
        contraction = std::clamp(contraction, 1e-5, 0.5);
      }
      sphere_ok = sphere_tried = contract_ok = contract_tried = 0;
    }
    while (next_cp < cfg.checkpoints.size() && cfg.checkpoints[next_cp] < it) ++next_cp;
    if (next_cp < cfg.checkpoints.size() && cfg.checkpoints[next_cp] == it) trace.points.push_back({it, mse, true});
  }
  trace.adversarial = x;
  return trace;
}

}  // namespace imsp::attack
