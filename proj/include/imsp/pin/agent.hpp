#pragma once

#include <optional>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/nn/network.hpp"
#include "imsp/pin/dae.hpp"

namespace imsp::pin {

struct AgentConfig {
  int height = 32;
  int width = 32;
  int conv1 = 16;
  int conv2 = 32;
  int hidden = 256;
  int components = 256;
};

// conv 3x3 s2, prelu, conv 3x3 s2, prelu, flatten, affine, prelu, affine to
// N, sigmoid.
nn::NetworkSpec agent_spec(const AgentConfig& cfg);

/// Eigenvector-selection network with optional frozen denoising front end.
struct Agent {
  nn::NetworkSpec spec;
  nn::ParamSet params;
  std::optional<Dae> dae;

  // Network input for image x (the DAE output when enabled).
  Vector input(const Vector& x) const;
};

// He init for the trunk; the output layer starts at zero so every p is 0.5.
Agent make_agent(const AgentConfig& cfg, SeededRng& rng);

Vector agent_forward(const Agent& agent, const Vector& x);
// Pre-sigmoid logits.
Vector agent_logits(const Agent& agent, const Vector& x);

Vector sample_mask(const Vector& p, SeededRng& rng);
Vector threshold_mask(const Vector& p);  // q_j = [p_j >= 0.5]

// sum_j q_j log p_j + (1 - q_j) log(1 - p_j), evaluated from logits for
// stability.
double log_prob(const Vector& logits, const Vector& q);
double log_prob_from_probs(const Vector& p, const Vector& q);

double l0(const Vector& q);

}  // namespace imsp::pin
