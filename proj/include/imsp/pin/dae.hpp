#pragma once

#include <vector>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/nn/network.hpp"

namespace imsp::pin {

/// Small convolutional denoiser used as frozen preprocessing for the agent.
struct Dae {
  nn::NetworkSpec spec;
  nn::ParamSet params;
};

nn::NetworkSpec dae_spec(int height, int width);

struct DaeReport {
  std::vector<double> epoch_mse;
};

// MSE training on (noisy, clean) pairs; the returned parameters are not
// touched again.
Dae dae_pretrain(const std::vector<Vector>& noisy, const std::vector<Vector>& clean, int height, int width,
                 int epochs, SeededRng& rng, DaeReport* report = nullptr, unsigned jobs = 0);

double dae_mse(const Dae& dae, const std::vector<Vector>& noisy, const std::vector<Vector>& clean);

}  // namespace imsp::pin
