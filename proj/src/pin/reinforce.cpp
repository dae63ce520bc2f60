#include "imsp/pin/reinforce.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "imsp/core/parallel.hpp"
#include "imsp/data/noise.hpp"

namespace imsp::pin {

RewardRecord reward(const Vector& q, const Vector& x_noisy, const Vector& x_clean, const pca::EigenBasis& basis,
                    double lambda) {
  const Vector recon = pca::project_unclamped(basis, q, x_noisy) - basis.mean;
  RewardRecord r;
  r.reconstruction = (recon - (x_clean - basis.mean)).norm();
  r.l0 = l0(q);
  r.reward = -r.reconstruction - lambda * r.l0;
  return r;
}

RewardContext::RewardContext(const Vector& x_noisy, const Vector& x_clean, const pca::EigenBasis& basis,
                             double lambda)
    : lambda_(lambda) {
  const Vector d = x_clean - basis.mean;
  c_ = pca::coefficients(basis, x_noisy);
  e_ = basis.vectors.transpose() * d;
  d2_ = d.squaredNorm();
}

RewardRecord RewardContext::operator()(const Vector& q) const {
  const double sq = (q.array() * c_.array() * (c_.array() - 2.0 * e_.array())).sum() + d2_;
  RewardRecord r;
  r.reconstruction = std::sqrt(std::max(sq, 0.0));
  r.l0 = l0(q);
  r.reward = -r.reconstruction - lambda_ * r.l0;
  return r;
}

PolicyGradient policy_gradient(const Agent& agent, const std::vector<Vector>& inputs, const RewardFn& reward_fn,
                               int k, SeededRng& rng, bool use_baseline, unsigned jobs) {
  if (inputs.empty()) throw std::invalid_argument("policy_gradient: empty batch");
  if (k < 1) throw std::invalid_argument("policy_gradient: k must be >= 1");
  const nn::NetworkSpec trunk = agent.spec.prefix(agent.spec.layers().size() - 1);
  const std::size_t n = inputs.size();
  const std::uint64_t base = rng.next_u64();

  struct Slot {
    nn::ForwardResult fr;
    Vector p;
    std::vector<Vector> masks;
    std::vector<double> rewards;
  };
  std::vector<Slot> slots(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        Slot& s = slots[i];
        s.fr = nn::forward(trunk, agent.params, agent.input(inputs[i]));
        s.p = s.fr.output.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
        SeededRng r(base, i);
        for (int j = 0; j < k; ++j) {
          s.masks.push_back(sample_mask(s.p, r));
          s.rewards.push_back(reward_fn(i, s.masks.back()));
        }
      },
      jobs);

  PolicyGradient out;
  double total = 0.0;
  double l0_total = 0.0;
  for (const Slot& s : slots) {
    for (std::size_t j = 0; j < s.rewards.size(); ++j) {
      total += s.rewards[j];
      l0_total += l0(s.masks[j]);
    }
  }
  out.masks = n * static_cast<std::size_t>(k);
  out.mean_reward = total / static_cast<double>(out.masks);
  out.mean_l0 = l0_total / static_cast<double>(out.masks);
  out.baseline = use_baseline ? out.mean_reward : 0.0;
  if (!std::isfinite(out.mean_reward)) return out;

  std::vector<Vector> grads(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        Slot& s = slots[i];
        // d log P / d logit_j = q_j - p_j.
        Vector up = Vector::Zero(s.p.size());
        for (std::size_t j = 0; j < s.masks.size(); ++j) up += (s.rewards[j] - out.baseline) * (s.masks[j] - s.p);
        up /= static_cast<double>(out.masks);
        grads[i] = nn::backward(s.fr.tape, up).params;
      },
      jobs);
  out.ascent = Vector::Zero(agent.params.values.size());
  for (const Vector& g : grads) out.ascent += g;
  return out;
}

StepResult reinforce_step(Agent& agent, const std::vector<Vector>& noisy, const std::vector<Vector>& clean,
                          const pca::EigenBasis& basis, const PinConfig& cfg, nn::OptimizerState& opt,
                          SeededRng& rng, unsigned jobs) {
  if (noisy.size() != clean.size() || noisy.empty())
    throw std::invalid_argument("reinforce_step: need aligned, non-empty batch");
  std::vector<RewardContext> ctx;
  ctx.reserve(noisy.size());
  for (std::size_t i = 0; i < noisy.size(); ++i) ctx.emplace_back(noisy[i], clean[i], basis, cfg.lambda);
  const PolicyGradient pg = policy_gradient(
      agent, noisy, [&](std::size_t i, const Vector& q) { return ctx[i](q).reward; }, cfg.samples, rng, true, jobs);
  StepResult r;
  r.mean_reward = pg.mean_reward;
  r.mean_l0 = pg.mean_l0;
  if (!std::isfinite(pg.mean_reward) || pg.ascent.size() == 0) {
    ++opt.skipped;
    return r;
  }
  r.applied = nn::sgd_momentum_step(agent.params, -pg.ascent, opt);
  return r;
}

PinTrainResult train_pin(Agent& agent, const std::vector<Vector>& clean, const pca::EigenBasis& basis,
                         const PinConfig& cfg, SeededRng& rng, unsigned jobs,
                         const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  if (clean.empty()) throw std::invalid_argument("train_pin: no training images");
  if (basis.count() != agent.spec.output_shape().size())
    throw std::invalid_argument("train_pin: agent output width differs from basis component count");
  nn::OptimizerState opt =
      nn::make_optimizer(agent.params, nn::LrSchedule{cfg.lr, cfg.decay_epochs, 0.5}, cfg.momentum);
  std::vector<std::size_t> order(clean.size());
  std::iota(order.begin(), order.end(), 0);
  PinTrainResult result;
  nn::ParamSet last_good = agent.params;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.epoch = epoch;
    shuffle(order, rng);
    double reward_sum = 0.0;
    double l0_sum = 0.0;
    std::size_t batches = 0;
    bool diverged = false;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<Vector> xs;
      std::vector<Vector> xn;
      for (std::size_t k = start; k < end; ++k) {
        xs.push_back(clean[order[k]]);
        xn.push_back(data::add_noise_at_intensity(xs.back(), cfg.noise_intensity, rng));
      }
      const StepResult s = reinforce_step(agent, xn, xs, basis, cfg, opt, rng, jobs);
      if (!std::isfinite(s.mean_reward) || !s.applied) {
        diverged = true;
        break;
      }
      reward_sum += s.mean_reward;
      l0_sum += s.mean_l0;
      ++batches;
    }
    if (diverged || !agent.params.values.allFinite()) {
      agent.params = last_good;
      result.aborted = true;
      break;
    }
    last_good = agent.params;
    EpochStats e{epoch, reward_sum / batches, l0_sum / batches / basis.count()};
    result.curve.push_back(e);
    result.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(e);
  }
  return result;
}

}  // namespace imsp::pin
