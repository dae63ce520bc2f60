#pragma once

#include "imsp/core/linalg.hpp"
#include "imsp/nn/network.hpp"

namespace imsp::nn {

struct LrSchedule {
  double base_lr = 0.01;
  int decay_epochs = 20;   // lr halves every decay_epochs; <= 0 disables decay
  double decay_factor = 0.5;

  double at(int epoch) const;
};

/// Heavy-ball momentum state: v <- mu v + g, theta <- theta - lr v.
struct OptimizerState {
  Vector velocity;
  LrSchedule schedule;
  double momentum = 0.9;
  double weight_decay = 0.0;  // L2 coefficient added to the gradient
  int epoch = 0;
  long steps = 0;
  long skipped = 0;

  double lr() const { return schedule.at(epoch); }
};

OptimizerState make_optimizer(const ParamSet& params, LrSchedule schedule, double momentum,
                              double weight_decay = 0.0);

// Returns false, leaving params and state untouched, if grads has a
// non-finite entry.
bool sgd_momentum_step(ParamSet& params, const Vector& grads, OptimizerState& state);

}  // namespace imsp::nn
