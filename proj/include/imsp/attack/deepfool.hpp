#pragma once

#include "imsp/attack/gradient_attacks.hpp"

namespace imsp::attack {

struct DeepFoolConfig {
  int max_iter = 50;
  double overshoot = 0.02;
  double intensity_cap = 0.0;  // > 0 rescales the final perturbation to at most cap * ||x||
  Objective objective = Objective::dodging;
};

// Linearizes f = s - tau in the attacker's view and steps by
// -(1 + overshoot) f / ||grad f||^2 grad f until the decision flips.
// Throws if the pair is already on the attacker's side of tau.
AttackResult deepfool_similarity(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                                 double tau, const DeepFoolConfig& cfg, SeededRng* rng);

}  // namespace imsp::attack
