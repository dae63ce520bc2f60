#include "imsp/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace imsp::nn {

double LrSchedule::at(int epoch) const {
  if (decay_epochs <= 0) return base_lr;
  return base_lr * std::pow(decay_factor, epoch / decay_epochs);
}

OptimizerState make_optimizer(const ParamSet& params, LrSchedule schedule, double momentum,
                              double weight_decay) {
  OptimizerState s;
  s.velocity = Vector::Zero(params.values.size());
  s.schedule = schedule;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  return s;
}

bool sgd_momentum_step(ParamSet& params, const Vector& grads, OptimizerState& state) {
  if (grads.size() != params.values.size() || state.velocity.size() != params.values.size())
    throw std::invalid_argument("sgd_momentum_step: gradient/velocity shape mismatch");
  if (!grads.allFinite()) {
    ++state.skipped;
    return false;
  }
  if (state.weight_decay != 0.0)
    state.velocity = state.momentum * state.velocity + grads + state.weight_decay * params.values;
  else
    state.velocity = state.momentum * state.velocity + grads;
  params.values -= state.lr() * state.velocity;
  ++state.steps;
  return true;
}

}  // namespace imsp::nn
