#pragma once

#include <filesystem>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/pca/basis.hpp"
#include "imsp/pin/agent.hpp"
#include "imsp/pin/config.hpp"

namespace imsp::pin {

/// Trained agent plus the basis it selects from.
struct PinModel {
  Agent agent;
  pca::EigenBasis basis;
  PinConfig config;
};

struct Inactivation {
  Vector p;
  Vector q;
  Vector unclamped;
  Vector output;  // clamped to [0,1]
};

// p from the agent; q sampled (stochastic, reparam_backward) or thresholded
// at 0.5 (deterministic, bpda_backward). Sampling modes require rng.
Inactivation inactivate_detail(const PinModel& model, const Vector& x, DefenseMode mode, SeededRng* rng);
Vector inactivate(const PinModel& model, const Vector& x, DefenseMode mode, SeededRng* rng);

// Gradient of <downstream, inactivate(x)> with respect to x, clamp treated as
// identity. bpda_backward: B_q B_q^T g with q = [p >= 0.5]. reparam_backward:
// the same projector term for the sampled q plus the straight-through agent
// path (dp/dx)^T J, J_j = g^T b_j c_j.
Vector defended_input_gradient(const PinModel& model, const Vector& x, const Vector& downstream, DefenseMode mode,
                               SeededRng* rng, Inactivation* forward_out = nullptr);

// Same contract with the mask already fixed (used when forward and backward
// must share one sampled mask).
Vector defended_input_gradient_for_mask(const PinModel& model, const Vector& x, const Vector& q,
                                        const Vector& downstream, bool agent_path);

// Directory layout: agent.imnn, basis.imsp, pin_config.json (+ dae.imnn).
void save_pin(const std::filesystem::path& dir, const PinModel& model);
PinModel load_pin(const std::filesystem::path& dir, int height, int width);

}  // namespace imsp::pin
