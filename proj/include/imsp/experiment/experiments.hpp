#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imsp/attack/blackbox.hpp"
#include "imsp/attack/gradient_attacks.hpp"
#include "imsp/attack/search.hpp"
#include "imsp/attack/sticker.hpp"
#include "imsp/experiment/workbench.hpp"
#include "imsp/recognizer/metrics.hpp"

namespace imsp::exp {

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<int> counts;
};

Histogram make_histogram(const std::vector<double>& values, int bins, double lo, double hi);
double variance(const std::vector<double>& v);
double median(std::vector<double> v);

// ---- subspace study -------------------------------------------------------

struct RegionStats {
  std::string region;
  std::vector<double> before;  // similarity with region noise
  std::vector<double> after;   // same images after top-K projection
  double var_before = 0.0;
  double var_after = 0.0;
  double mean_before = 0.0;
  double mean_after = 0.0;
};

struct SubspacePair {
  bool positive = false;
  double clean_similarity = 0.0;
  double clean_similarity_projected = 0.0;
  std::vector<RegionStats> regions;  // top, middle, bottom
};

struct SubspaceReport {
  int samples = 0;
  double intensity = 0.0;
  int components = 0;
  std::vector<SubspacePair> pairs;  // one positive, one negative
};

SubspaceReport subspace_study(Workbench& wb, const SubspaceConfig& cfg);

// ---- pairwise attack evaluation --------------------------------------------

struct PairSet {
  std::vector<Vector> probes;
  std::vector<Vector> refs;
  std::vector<char> positive;
  std::size_t size() const { return probes.size(); }
};

// Evaluation pairs, optionally limited to the first n/2 positive and n/2
// negative pairs (n = 0 keeps all).
PairSet eval_pairs(const data::Dataset& data, int n = 0);

struct AttackSpec {
  std::string name;  // clean, fgsm, ifgsm, pgd, pgd100, deepfool
  attack::Protocol protocol = attack::Protocol::offline;
  pin::DefenseMode grad_mode = pin::DefenseMode::reparam_backward;
  double intensity = 0.04;
};

struct Crafted {
  std::vector<Vector> adversarial;
  std::vector<double> intensity;  // realized, per pair
  int flagged = 0;
};

// Crafts one adversarial probe per pair against `attacked` (ignored offline).
Crafted craft(const rec::RecognizerModel& model, const attack::Defense& attacked, const AttackSpec& spec,
              const PairSet& pairs, const AttackSuiteConfig& acfg, std::uint64_t seed, unsigned jobs);

// Deployed scores: defense applied to probe and reference, per-pair streams.
std::vector<double> deployed_scores(const rec::RecognizerModel& model, const attack::Defense& deployed,
                                    const std::vector<Vector>& probes, const PairSet& pairs, std::uint64_t seed,
                                    unsigned jobs);

struct AttackRow {
  std::string attack;
  std::string protocol;  // offline | online | none
  std::string defense;
  rec::VerificationMetrics metrics;
  double success_rate = 0.0;  // pairs on the attacker's side of tau
  double mean_intensity = 0.0;
  int flagged = 0;
  std::size_t pairs = 0;
  std::vector<double> scores;
};

AttackRow make_row(const std::string& attack, const std::string& protocol, const std::string& defense,
                   const std::vector<double>& scores, const PairSet& pairs, double tau,
                   const std::vector<double>& intensities, int flagged);

struct NamedDefense {
  std::string name;
  attack::Defense defense;
};

// Rows for every (attack, defense, protocol); offline adversarials are crafted
// once and scored under every defense.
std::vector<AttackRow> attack_table(const rec::RecognizerModel& model, const std::vector<NamedDefense>& defenses,
                                    const std::vector<std::string>& attacks, const std::string& protocol,
                                    const PairSet& pairs, const AttackSuiteConfig& acfg, std::uint64_t attack_seed,
                                    std::uint64_t eval_seed, unsigned jobs);

const AttackRow& find_row(const std::vector<AttackRow>& rows, const std::string& attack, const std::string& protocol,
                          const std::string& defense);

// ---- gradient audit --------------------------------------------------------

struct AuditCondition {
  std::string name;
  bool passed = false;
  nlohmann::json numbers;
};

struct AuditReport {
  std::vector<AuditCondition> conditions;
  std::vector<attack::SweepPoint> sweep;
  std::vector<AttackRow> rows;
};

AuditReport audit_gradients(Workbench& wb);

// ---- black-box and sticker -------------------------------------------------

struct BlackBoxReport {
  std::vector<attack::DistortionTrace> undefended;
  std::vector<attack::DistortionTrace> defended;
  std::vector<char> positive;
  double median_undefended = 0.0;
  double median_defended = 0.0;
  double ratio = 0.0;
  int started_pairs = 0;
};

BlackBoxReport blackbox_study(Workbench& wb);

struct StickerReport {
  attack::StickerResult undefended;
  attack::StickerResult defended_online;
  double defended_offline_error = 0.0;  // undefended patch scored with PIN deployed
  int target_identity = 0;
  std::size_t gallery = 0;
};

StickerReport sticker_study(Workbench& wb);

}  // namespace imsp::exp
