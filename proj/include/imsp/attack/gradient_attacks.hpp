#pragma once

#include <cstdint>
#include <string>

#include "imsp/attack/target.hpp"

namespace imsp::attack {

struct AttackConfig {
  double intensity = 0.04;  // ||eta|| / ||x|| budget (fgsm, ifgsm)
  double epsilon = 0.0;     // L-inf budget (pgd, random search)
  int steps = 10;
  double step_size = 0.0;   // pgd; 0 selects 2.5 * epsilon / steps
  Objective objective = Objective::dodging;
  std::uint64_t seed = 0;
};

struct AttackResult {
  Vector adversarial;
  double intensity_pre_clip = 0.0;   // intended ||eta|| / ||x|| before clipping
  double intensity_post_clip = 0.0;  // realized
  double linf = 0.0;
  int gradient_queries = 0;
  bool flagged = false;  // zero gradient, non-convergence or budget cap
  std::string note;
};

// Per-step budget for a signed step hitting `level` * ||x|| in L2.
double sign_step_alpha(const Vector& sign, const Vector& x, double level);

AttackResult fgsm(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                  const AttackConfig& cfg, SeededRng* rng);

// cfg.steps signed steps, each at intensity cfg.intensity / cfg.steps.
AttackResult ifgsm(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                   const AttackConfig& cfg, SeededRng* rng);

// Signed steps projected onto the L-inf ball of radius cfg.epsilon around the
// probe and onto [0,1]; no random start.
AttackResult pgd(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                 const AttackConfig& cfg, SeededRng* rng);

double linf_distance(const Vector& a, const Vector& b);

}  // namespace imsp::attack
