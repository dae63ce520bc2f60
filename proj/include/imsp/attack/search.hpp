#pragma once

#include <functional>
#include <vector>

#include "imsp/attack/gradient_attacks.hpp"

namespace imsp::attack {

struct RandomSearchResult {
  bool found = false;
  long samples = 0;
  long first_hit = -1;
  Vector best;              // sample with the most adversarial score
  double best_score = 0.0;  // deployed similarity of `best`
};

// Uniform samples from the L-inf ball of radius epsilon (clipped to [0,1]),
// each judged by the deployed decision.
RandomSearchResult random_search_ball(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                                      Objective objective, double epsilon, long n_samples, SeededRng& rng,
                                      bool stop_at_first = false);

struct SweepPoint {
  double intensity = 0.0;
  int successes = 0;
  int trials = 0;
  double rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

// attack_one(pair index, intensity) -> true if the attacked pair flips.
std::vector<SweepPoint> intensity_sweep(const std::vector<double>& intensities, int pairs,
                                        const std::function<bool(int, double)>& attack_one, unsigned jobs = 0);

// Non-decreasing within 3 binomial standard errors between consecutive points.
bool sweep_monotone(const std::vector<SweepPoint>& curve, double sigmas = 3.0);

}  // namespace imsp::attack
