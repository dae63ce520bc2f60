#pragma once

#include <vector>

#include "imsp/attack/target.hpp"

namespace imsp::attack {

struct TracePoint {
  int iteration = 0;
  double mse = 0.0;
  bool adversarial = false;
};

struct DistortionTrace {
  std::vector<TracePoint> points;  // iteration 0 is the bootstrap point
  Vector adversarial;
  bool started = false;  // a bootstrap point was found
  long queries = 0;
  double final_mse() const { return points.empty() ? 0.0 : points.back().mse; }
};

struct BlackBoxConfig {
  int iterations = 2000;
  std::vector<int> checkpoints{200, 1000, 2000};
  double step = 0.05;         // spherical step, relative to the current distance
  double contraction = 0.05;  // fraction of the distance removed per proposal
  int bootstrap_budget = 100;
  int adapt_window = 20;       // proposals between step-size updates
};

// Decision-only walk on the deployed pipeline. The start point is the
// reference image for impersonation (if accepted) or a uniform-noise blend,
// pulled toward the probe by bisection. Each iteration takes a Gaussian step
// on the sphere around the probe at the current distance and, if that stays
// adversarial, tries a contraction toward the probe; the contraction is kept
// only if it stays adversarial and lowers the MSE.
DistortionTrace decision_blackbox(const AttackTarget& target, const Vector& probe, const Vector& ref_image,
                                  const Vector& ref_embedding, Objective objective, const BlackBoxConfig& cfg,
                                  SeededRng& rng);

}  // namespace imsp::attack
