#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "imsp/core/rng.hpp"
#include "imsp/recognizer/metrics.hpp"

namespace imsp::rec {
namespace {

struct Rates {
  double far;
  double frr;
};

Rates rates_at(const std::vector<double>& pos, const std::vector<double>& neg, double t) {
  double fa = 0;
  double fr = 0;
  for (double s : neg) fa += s > t;
  for (double s : pos) fr += !(s > t);
  return {fa / neg.size(), fr / pos.size()};
}

// Every distinct decision rule: below all scores, at each score.
std::vector<double> sweep(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::vector<double> t{-std::numeric_limits<double>::infinity()};
  t.insert(t.end(), pos.begin(), pos.end());
  t.insert(t.end(), neg.begin(), neg.end());
  return t;
}

double mann_whitney(const std::vector<double>& pos, const std::vector<double>& neg) {
  double u = 0;
  for (double p : pos)
    for (double n : neg) u += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return u / (pos.size() * neg.size());
}

std::vector<double> draw(SeededRng& rng, int n, double mu) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(mu + 0.2 * rng.normal());
  return v;
}

TEST(Metrics, WorkedExample) {
  const auto m = compute_metrics({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1});
  EXPECT_NEAR(m.eer, 1.0 / 3.0, 1e-12);
  // Exhaustive sweep: a rule with FAR == FRR == 1/3 exists, none with both lower.
  bool found = false;
  for (double t : sweep({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1})) {
    const auto r = rates_at({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1}, t);
    found |= std::abs(r.far - 1.0 / 3) < 1e-12 && std::abs(r.frr - 1.0 / 3) < 1e-12;
    EXPECT_GE(std::max(r.far, r.frr), 1.0 / 3 - 1e-12);
  }
  EXPECT_TRUE(found);
  EXPECT_NEAR(m.auc, mann_whitney({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1}), 1e-12);
}

TEST(Metrics, SeparatedAndSwappedScores) {
  const auto sep = compute_metrics({0.9, 0.8, 0.75}, {0.3, 0.2, 0.1});
  EXPECT_EQ(sep.eer, 0.0);
  EXPECT_EQ(sep.auc, 1.0);
  for (double t : sep.tar_at_far) EXPECT_EQ(t, 1.0);
  const auto swapped = compute_metrics({0.3, 0.2, 0.1}, {0.9, 0.8, 0.75});
  EXPECT_EQ(swapped.eer, 1.0);
  EXPECT_EQ(swapped.auc, 0.0);
}

TEST(Metrics, EerBracketedBySweepOnRandomScores) {
  SeededRng rng(3);
  for (int s = 0; s < 40; ++s) {
    const auto pos = draw(rng, 20 + s, 0.6);
    const auto neg = draw(rng, 31 + s, 0.4);
    const auto m = compute_metrics(pos, neg);
    double lo = 1.0;
    double hi = 1.0;
    for (double t : sweep(pos, neg)) {
      const auto r = rates_at(pos, neg, t);
      lo = std::min(lo, std::min(r.far, r.frr));
      hi = std::min(hi, std::max(r.far, r.frr));
    }
    EXPECT_GE(m.eer, lo - 1e-12);
    EXPECT_LE(m.eer, hi + 1e-12);
    EXPECT_NEAR(m.auc, mann_whitney(pos, neg), 1e-12);
  }
}

TEST(Metrics, AucHandlesTies) {
  const std::vector<double> pos{0.5, 0.5, 0.7, 0.2};
  const std::vector<double> neg{0.5, 0.2, 0.1};
  EXPECT_NEAR(compute_metrics(pos, neg).auc, mann_whitney(pos, neg), 1e-12);
}

TEST(Metrics, IdenticalDistributionsGiveChance) {
  SeededRng rng(4);
  const auto m = compute_metrics(draw(rng, 4000, 0.5), draw(rng, 4000, 0.5));
  EXPECT_NEAR(m.eer, 0.5, 0.03);
  EXPECT_NEAR(m.auc, 0.5, 0.03);
}

TEST(Metrics, ScaleInvariance) {
  SeededRng rng(5);
  auto pos = draw(rng, 50, 0.55);
  auto neg = draw(rng, 60, 0.45);
  const auto a = compute_metrics(pos, neg);
  for (double& v : pos) v *= 3.7;
  for (double& v : neg) v *= 3.7;
  const auto b = compute_metrics(pos, neg);
  EXPECT_NEAR(a.eer, b.eer, 1e-12);
  EXPECT_NEAR(a.auc, b.auc, 1e-12);
}

TEST(Metrics, AddingCorrectlyOrderedPairNeverRaisesEer) {
  SeededRng rng(6);
  for (int s = 0; s < 30; ++s) {
    auto pos = draw(rng, 25, 0.55);
    auto neg = draw(rng, 25, 0.45);
    const double before = compute_metrics(pos, neg).eer;
    const double top = std::max(*std::max_element(pos.begin(), pos.end()), *std::max_element(neg.begin(), neg.end()));
    pos.push_back(top + 1.0);
    EXPECT_LE(compute_metrics(pos, neg).eer, before + 1e-12);
  }
}

TEST(Metrics, TarAtFarInterpolates) {
  // Ten negatives, so FAR moves in steps of 0.1.
  std::vector<double> neg;
  for (int i = 0; i < 10; ++i) neg.push_back(0.05 * i);
  // 0.45 is tied with a negative, so the curve has a diagonal segment there.
  const std::vector<double> pos{0.1, 0.3, 0.45, 0.47, 0.9};
  const auto roc = roc_curve(pos, neg);
  // At threshold 0.45 FAR is 0 and TAR 2/5; at 0.40 FAR is 0.1 and TAR 3/5.
  EXPECT_NEAR(tar_at_far(roc, 0.1), 0.6, 1e-12);
  EXPECT_NEAR(tar_at_far(roc, 0.05), 0.5, 1e-12);
  // A step that raises FAR before TAR stays flat.
  EXPECT_NEAR(tar_at_far(roc_curve({0.44, 0.9}, {0.45, 0.1}), 0.25), 0.5, 1e-12);
  EXPECT_NEAR(tar_at_far(roc, 1.0), 1.0, 1e-12);
  for (std::size_t k = 1; k < roc.size(); ++k) {
    EXPECT_LE(roc[k].tpr, roc[k - 1].tpr);
    EXPECT_LE(roc[k].fpr, roc[k - 1].fpr);
  }
  EXPECT_EQ(roc.front().tpr, 1.0);
  EXPECT_EQ(roc.front().fpr, 1.0);
}

TEST(Metrics, RejectsEmptyInput) {
  EXPECT_THROW(compute_metrics({}, {0.1}), std::invalid_argument);
  EXPECT_THROW(compute_metrics({0.1}, {}), std::invalid_argument);
  EXPECT_TRUE(compute_metrics({0.9}, {0.1, 0.2}).low_confidence);
}

TEST(Calibration, KeepsTargetFractionAbove) {
  SeededRng rng(7);
  for (int s = 0; s < 30; ++s) {
    const auto pos = draw(rng, 50 + 17 * s, 0.7);
    for (double tpr : {0.9, 0.99, 1.0}) {
      const double t = calibrate_threshold(pos, tpr);
      const std::size_t above = std::count_if(pos.begin(), pos.end(), [&](double v) { return v > t; });
      const auto allowed = static_cast<std::size_t>(std::floor((1 - tpr) * pos.size() + 1e-9));
      EXPECT_EQ(above, pos.size() - allowed) << "n=" << pos.size() << " tpr=" << tpr;
      EXPECT_GE(static_cast<double>(above) / pos.size(), tpr - 1e-12);
    }
  }
}

TEST(Calibration, MidpointAndErrors) {
  EXPECT_NEAR(calibrate_threshold({0.1, 0.3, 0.5, 0.7, 0.9, 0.2, 0.4, 0.6, 0.8, 1.0}, 0.8), 0.25, 1e-12);
  EXPECT_THROW(calibrate_threshold({}, 0.9), std::invalid_argument);
  EXPECT_THROW(calibrate_threshold({0.1}, 0.0), std::invalid_argument);
  EXPECT_THROW(calibrate_threshold({0.1}, 1.5), std::invalid_argument);
}

}  // namespace
}  // namespace imsp::rec
