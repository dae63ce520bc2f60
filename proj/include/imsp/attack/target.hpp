#pragma once

#include <string>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/pca/basis.hpp"
#include "imsp/pin/defense.hpp"
#include "imsp/recognizer/recognizer.hpp"

namespace imsp::attack {

enum class Protocol { offline, online };
enum class Objective { dodging, impersonation };

std::string to_string(Protocol p);
std::string to_string(Objective o);
Protocol parse_protocol(const std::string& s);
Objective parse_objective(const std::string& s);

// Positive pairs are attacked by dodging, negative pairs by impersonation.
inline Objective objective_for(bool positive_pair) {
  return positive_pair ? Objective::dodging : Objective::impersonation;
}

/// Input purification applied in front of the recognizer.
struct Defense {
  enum class Kind { none, pin, classical_pca };
  Kind kind = Kind::none;
  const pin::PinModel* pin = nullptr;
  const pca::EigenBasis* basis = nullptr;  // classical PCA
  int k = 0;                               // classical PCA components kept
  pin::DefenseMode eval_mode = pin::DefenseMode::stochastic;
  pin::DefenseMode grad_mode = pin::DefenseMode::reparam_backward;
  int eval_samples = 1;

  static Defense none();
  static Defense learnable(const pin::PinModel& model, pin::DefenseMode eval_mode = pin::DefenseMode::stochastic,
                           pin::DefenseMode grad_mode = pin::DefenseMode::reparam_backward);
  static Defense classical(const pca::EigenBasis& basis, int k);

  bool active() const { return kind != Kind::none; }
  std::string describe() const;

  // Deployed purification; stochastic modes draw from rng.
  Vector apply(const Vector& x, SeededRng* rng) const;
};

/// Recognizer plus deployed defense. The protocol decides what the attacker
/// differentiates: offline sees the bare recognizer, online the defended
/// pipeline with the defense's backward rule.
class AttackTarget {
 public:
  AttackTarget(const rec::RecognizerModel& model, Defense defense, Protocol protocol);

  const rec::RecognizerModel& model() const { return *model_; }
  const Defense& defense() const { return defense_; }
  Protocol protocol() const { return protocol_; }
  double threshold() const { return model_->threshold; }

  // Evaluation side: defense always applied.
  Vector deployed_embedding(const Vector& x, SeededRng* rng) const;
  double deployed_score(const Vector& probe, const Vector& ref_embedding, SeededRng* rng) const;
  bool deployed_accepts(const Vector& probe, const Vector& ref_embedding, SeededRng* rng) const;

  // Attacker side.
  Vector attack_embedding(const Vector& x, SeededRng* rng) const;
  // Similarity in the attacker's view and, if grad is non-null, its gradient
  // with respect to the probe.
  double attack_score(const Vector& probe, const Vector& ref_embedding, SeededRng* rng, Vector* grad) const;

 private:
  const rec::RecognizerModel* model_;
  Defense defense_;
  Protocol protocol_;
};

// Gradient of the attack objective (-s for dodging, +s for impersonation)
// with respect to the probe; ascending it pushes the decision over.
Vector pair_objective_grad(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                           Objective objective, SeededRng* rng, double* score = nullptr);

// True when the score is on the attacker's side of the threshold.
bool is_adversarial(double score, double threshold, Objective objective);

}  // namespace imsp::attack
