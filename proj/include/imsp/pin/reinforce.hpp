#pragma once

#include <functional>
#include <vector>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/nn/optimizer.hpp"
#include "imsp/pca/basis.hpp"
#include "imsp/pin/agent.hpp"
#include "imsp/pin/config.hpp"

namespace imsp::pin {

struct RewardRecord {
  double reward = 0.0;
  double reconstruction = 0.0;  // ||B_q B_q^T (x_noisy - mean) - (x_clean - mean)||_2
  double l0 = 0.0;
  double baseline = 0.0;        // filled in by the minibatch step
};

// Direct evaluation: r = -reconstruction - lambda * ||q||_0.
RewardRecord reward(const Vector& q, const Vector& x_noisy, const Vector& x_clean, const pca::EigenBasis& basis,
                    double lambda);

/// Per-image precomputation so each mask costs O(N): with orthonormal B,
/// ||B(q.c) - d||^2 = sum q c^2 - 2 sum q c e + ||d||^2, c = B^T(x_n - m),
/// e = B^T d, d = x - m.
class RewardContext {
 public:
  RewardContext(const Vector& x_noisy, const Vector& x_clean, const pca::EigenBasis& basis, double lambda);
  RewardRecord operator()(const Vector& q) const;

 private:
  Vector c_;
  Vector e_;
  double d2_;
  double lambda_;
};

struct PolicyGradient {
  Vector ascent;  // estimate of grad_theta E[r]; descend on -ascent
  double mean_reward = 0.0;
  double baseline = 0.0;
  double mean_l0 = 0.0;
  std::size_t masks = 0;
};

// reward_fn(image index in batch, mask) -> reward.
using RewardFn = std::function<double(std::size_t, const Vector&)>;

// Score-function estimate over a minibatch: for every image draw k masks,
// weight each by (r - r0) with r0 the mean reward of the whole minibatch, and
// average (r - r0) grad log P(q | x) over images and samples.
PolicyGradient policy_gradient(const Agent& agent, const std::vector<Vector>& inputs, const RewardFn& reward_fn,
                               int k, SeededRng& rng, bool use_baseline = true, unsigned jobs = 0);

struct StepResult {
  double mean_reward = 0.0;
  double mean_l0 = 0.0;
  bool applied = false;
};

// One minibatch of reconstruction rewards followed by one momentum step.
StepResult reinforce_step(Agent& agent, const std::vector<Vector>& noisy, const std::vector<Vector>& clean,
                          const pca::EigenBasis& basis, const PinConfig& cfg, nn::OptimizerState& opt,
                          SeededRng& rng, unsigned jobs = 0);

struct PinTrainResult {
  std::vector<EpochStats> curve;
  bool aborted = false;  // reward became non-finite; agent holds the last good epoch
  int epochs_run = 0;
};

// Trains agent.params in place on clean images perturbed each epoch with
// Gaussian noise at cfg.noise_intensity.
PinTrainResult train_pin(Agent& agent, const std::vector<Vector>& clean, const pca::EigenBasis& basis,
                         const PinConfig& cfg, SeededRng& rng, unsigned jobs = 0,
                         const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace imsp::pin
