#include "imsp/attack/target.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace imsp::attack {

std::string to_string(Protocol p) { return p == Protocol::offline ? "offline" : "online"; }
std::string to_string(Objective o) { return o == Objective::dodging ? "dodging" : "impersonation"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "offline") return Protocol::offline;
  if (s == "online") return Protocol::online;
  throw std::invalid_argument(fmt::format("unknown protocol '{}'", s));
}

Objective parse_objective(const std::string& s) {
  if (s == "dodging") return Objective::dodging;
  if (s == "impersonation") return Objective::impersonation;
  throw std::invalid_argument(fmt::format("unknown objective '{}'", s));
}

Defense Defense::none() { return Defense{}; }

Defense Defense::learnable(const pin::PinModel& model, pin::DefenseMode eval_mode, pin::DefenseMode grad_mode) {
  if (grad_mode != pin::DefenseMode::reparam_backward && grad_mode != pin::DefenseMode::bpda_backward)
    throw std::invalid_argument("Defense: gradient mode must be reparam_backward or bpda_backward");
  Defense d;
  d.kind = Kind::pin;
  d.pin = &model;
  d.eval_mode = eval_mode;
  d.grad_mode = grad_mode;
  d.eval_samples = model.config.eval_samples;
  return d;
}

Defense Defense::classical(const pca::EigenBasis& basis, int k) {
  if (k < 0 || k > basis.count()) throw std::invalid_argument("Defense: K outside the basis");
  Defense d;
  d.kind = Kind::classical_pca;
  d.basis = &basis;
  d.k = k;
  return d;
}

std::string Defense::describe() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::pin: return fmt::format("pin({}/{})", pin::to_string(eval_mode), pin::to_string(grad_mode));
    case Kind::classical_pca: return fmt::format("pca-{}", k);
  }
  return "?";
}

Vector Defense::apply(const Vector& x, SeededRng* rng) const {
  switch (kind) {
    case Kind::none: return x;
    case Kind::classical_pca: return pca::classical_pca_defend(*basis, k, x);
    case Kind::pin: {
      if (eval_samples <= 1) return pin::inactivate(*pin, x, eval_mode, rng);
      Vector acc = Vector::Zero(x.size());
      for (int s = 0; s < eval_samples; ++s) acc += pin::inactivate(*pin, x, eval_mode, rng);
      return acc / eval_samples;
    }
  }
  return x;
}

AttackTarget::AttackTarget(const rec::RecognizerModel& model, Defense defense, Protocol protocol)
    : model_(&model), defense_(defense), protocol_(protocol) {}

Vector AttackTarget::deployed_embedding(const Vector& x, SeededRng* rng) const {
  return rec::embed(*model_, defense_.apply(x, rng));
}

double AttackTarget::deployed_score(const Vector& probe, const Vector& ref_embedding, SeededRng* rng) const {
  return rec::similarity(deployed_embedding(probe, rng), ref_embedding);
}

bool AttackTarget::deployed_accepts(const Vector& probe, const Vector& ref_embedding, SeededRng* rng) const {
  return deployed_score(probe, ref_embedding, rng) > threshold();
}

Vector AttackTarget::attack_embedding(const Vector& x, SeededRng* rng) const {
  if (protocol_ == Protocol::offline || !defense_.active()) return rec::embed(*model_, x);
  if (defense_.kind == Defense::Kind::classical_pca) return rec::embed(*model_, defense_.apply(x, rng));
  return rec::embed(*model_, pin::inactivate(*defense_.pin, x, defense_.grad_mode, rng));
}

double AttackTarget::attack_score(const Vector& probe, const Vector& ref_embedding, SeededRng* rng,
                                  Vector* grad) const {
  if (protocol_ == Protocol::offline || !defense_.active())
    return rec::similarity_grad(*model_, probe, ref_embedding, grad);
  if (defense_.kind == Defense::Kind::classical_pca) {
    const Vector y = defense_.apply(probe, rng);
    Vector gy;
    const double s = rec::similarity_grad(*model_, y, ref_embedding, grad ? &gy : nullptr);
    if (grad) *grad = pca::project_direction(*defense_.basis, pca::first_k_mask(*defense_.basis, defense_.k), gy);
    return s;
  }
  const pin::PinModel& pm = *defense_.pin;
  if (defense_.grad_mode == pin::DefenseMode::reparam_backward && !rng)
    throw std::invalid_argument("attack_score: stochastic defense gradient needs a seeded rng");
  pin::Inactivation fwd = pin::inactivate_detail(pm, probe, defense_.grad_mode, rng);
  Vector gy;
  const double s = rec::similarity_grad(*model_, fwd.output, ref_embedding, grad ? &gy : nullptr);
  if (grad)
    *grad = pin::defended_input_gradient_for_mask(pm, probe, fwd.q, gy,
                                                  defense_.grad_mode == pin::DefenseMode::reparam_backward);
  return s;
}

Vector pair_objective_grad(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                           Objective objective, SeededRng* rng, double* score) {
  Vector g;
  const double s = target.attack_score(probe, ref_embedding, rng, &g);
  if (score) *score = s;
  return objective == Objective::dodging ? Vector(-g) : g;
}

bool is_adversarial(double score, double threshold, Objective objective) {
  return objective == Objective::dodging ? score <= threshold : score > threshold;
}

}  // namespace imsp::attack
