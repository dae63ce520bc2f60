#include "imsp/pin/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace imsp::pin {

using nn::LayerSpec;

nn::NetworkSpec agent_spec(const AgentConfig& cfg) {
  const int h = (((cfg.height + 1) / 2) + 1) / 2;
  const int w = (((cfg.width + 1) / 2) + 1) / 2;
  return nn::NetworkSpec(
      nn::Shape{1, cfg.height, cfg.width},
      {LayerSpec::conv2d(1, cfg.conv1, 3, 2), LayerSpec::prelu(cfg.conv1), LayerSpec::conv2d(cfg.conv1, cfg.conv2, 3, 2),
       LayerSpec::prelu(cfg.conv2), LayerSpec::flatten(), LayerSpec::affine(cfg.conv2 * h * w, cfg.hidden),
       LayerSpec::prelu(cfg.hidden), LayerSpec::affine(cfg.hidden, cfg.components), LayerSpec::sigmoid()});
}

Vector Agent::input(const Vector& x) const {
  if (!dae) return x;
  return nn::evaluate(dae->spec, dae->params, x);
}

Agent make_agent(const AgentConfig& cfg, SeededRng& rng) {
  Agent a;
  a.spec = agent_spec(cfg);
  a.params = nn::init_params(a.spec, rng);
  const std::size_t head = a.spec.layers().size() - 2;
  a.params.weight(a.spec, head).setZero();
  a.params.bias(a.spec, head).setZero();
  return a;
}

Vector agent_forward(const Agent& agent, const Vector& x) { return nn::evaluate(agent.spec, agent.params, agent.input(x)); }

Vector agent_logits(const Agent& agent, const Vector& x) {
  const nn::NetworkSpec trunk = agent.spec.prefix(agent.spec.layers().size() - 1);
  return nn::evaluate(trunk, agent.params, agent.input(x));
}

Vector sample_mask(const Vector& p, SeededRng& rng) {
  Vector q(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) q(j) = rng.bernoulli(p(j)) ? 1.0 : 0.0;
  return q;
}

Vector threshold_mask(const Vector& p) { return (p.array() >= 0.5).cast<double>().matrix(); }

namespace {
// log sigmoid(z), stable for large |z|.
double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }
}  // namespace

double log_prob(const Vector& logits, const Vector& q) {
  if (logits.size() != q.size()) throw std::invalid_argument("log_prob: size mismatch");
  double s = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) s += q(j) > 0.5 ? log_sigmoid(logits(j)) : log_sigmoid(-logits(j));
  return s;
}

double log_prob_from_probs(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("log_prob: size mismatch");
  double s = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) s += q(j) * std::log(p(j)) + (1.0 - q(j)) * std::log(1.0 - p(j));
  return s;
}

double l0(const Vector& q) { return static_cast<double>((q.array() != 0.0).count()); }

}  // namespace imsp::pin
