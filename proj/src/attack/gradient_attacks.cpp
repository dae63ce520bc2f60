#include "imsp/attack/gradient_attacks.hpp"

#include <cmath>
#include <stdexcept>

#include "imsp/data/noise.hpp"

namespace imsp::attack {

namespace {

Vector sign_of(const Vector& g) {
  return g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

void finish(AttackResult& r, const Vector& probe) {
  const Vector eta = r.adversarial - probe;
  r.intensity_post_clip = eta.norm() / probe.norm();
  r.linf = eta.size() ? eta.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

double linf_distance(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

double sign_step_alpha(const Vector& sign, const Vector& x, double level) {
  const double nnz = static_cast<double>((sign.array() != 0.0).count());
  if (nnz == 0.0) return 0.0;
  return level * x.norm() / std::sqrt(nnz);
}

AttackResult fgsm(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                  const AttackConfig& cfg, SeededRng* rng) {
  if (cfg.intensity < 0.0) throw std::invalid_argument("fgsm: negative intensity");
  AttackResult r;
  r.adversarial = probe;
  if (cfg.intensity == 0.0) {
    finish(r, probe);
    return r;
  }
  const Vector s = sign_of(pair_objective_grad(target, probe, ref_embedding, cfg.objective, rng));
  r.gradient_queries = 1;
  const double alpha = sign_step_alpha(s, probe, cfg.intensity);
  if (alpha == 0.0) {
    r.flagged = true;
    r.note = "zero gradient";
    finish(r, probe);
    return r;
  }
  r.intensity_pre_clip = cfg.intensity;
  r.adversarial = data::clip01(probe + alpha * s);
  finish(r, probe);
  return r;
}

AttackResult ifgsm(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                   const AttackConfig& cfg, SeededRng* rng) {
  if (cfg.steps < 1) throw std::invalid_argument("ifgsm: steps must be >= 1");
  if (cfg.intensity < 0.0) throw std::invalid_argument("ifgsm: negative intensity");
  AttackResult r;
  r.adversarial = probe;
  if (cfg.intensity == 0.0) {
    finish(r, probe);
    return r;
  }
  const double level = cfg.intensity / cfg.steps;
  Vector pre = Vector::Zero(probe.size());
  int zero_steps = 0;
  for (int t = 0; t < cfg.steps; ++t) {
    const Vector s = sign_of(pair_objective_grad(target, r.adversarial, ref_embedding, cfg.objective, rng));
    ++r.gradient_queries;
    const double alpha = sign_step_alpha(s, probe, level);
    if (alpha == 0.0) {
      ++zero_steps;
      continue;
    }
    pre += alpha * s;
    r.adversarial = data::clip01(r.adversarial + alpha * s);
  }
  if (zero_steps == cfg.steps) {
    r.flagged = true;
    r.note = "zero gradient";
  }
  r.intensity_pre_clip = pre.norm() / probe.norm();
  finish(r, probe);
  return r;
}

AttackResult pgd(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                 const AttackConfig& cfg, SeededRng* rng) {
  if (cfg.steps < 1) throw std::invalid_argument("pgd: steps must be >= 1");
  if (cfg.epsilon < 0.0) throw std::invalid_argument("pgd: negative epsilon");
  AttackResult r;
  r.adversarial = probe;
  if (cfg.epsilon == 0.0) {
    finish(r, probe);
    return r;
  }
  const double step = cfg.step_size > 0.0 ? cfg.step_size : 2.5 * cfg.epsilon / cfg.steps;
  const Vector lo = (probe.array() - cfg.epsilon).max(0.0).matrix();
  const Vector hi = (probe.array() + cfg.epsilon).min(1.0).matrix();
  int zero_steps = 0;
  for (int t = 0; t < cfg.steps; ++t) {
    const Vector s = sign_of(pair_objective_grad(target, r.adversarial, ref_embedding, cfg.objective, rng));
    ++r.gradient_queries;
    if ((s.array() == 0.0).all()) ++zero_steps;
    r.adversarial = (r.adversarial + step * s).cwiseMax(lo).cwiseMin(hi);
  }
  if (zero_steps == cfg.steps) {
    r.flagged = true;
    r.note = "zero gradient";
  }
  r.intensity_pre_clip = std::sqrt(static_cast<double>(probe.size())) * cfg.epsilon / probe.norm();
  finish(r, probe);
  return r;
}

}  // namespace imsp::attack
