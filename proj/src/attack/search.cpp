#include "imsp/attack/search.hpp"

#include <cmath>
#include <stdexcept>

#include "imsp/core/parallel.hpp"
#include "imsp/data/noise.hpp"

namespace imsp::attack {

RandomSearchResult random_search_ball(const AttackTarget& target, const Vector& probe, const Vector& ref_embedding,
                                      Objective objective, double epsilon, long n_samples, SeededRng& rng,
                                      bool stop_at_first) {
  if (n_samples < 1) throw std::invalid_argument("random_search_ball: n_samples must be >= 1");
  if (epsilon < 0.0) throw std::invalid_argument("random_search_ball: negative epsilon");
  SeededRng draw_rng = rng.derive(1);
  SeededRng query_rng = rng.derive(2);
  RandomSearchResult r;
  const double sign = objective == Objective::dodging ? -1.0 : 1.0;
  double best_key = -1e300;
  Vector x(probe.size());
  for (long n = 0; n < n_samples; ++n) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = probe(i) + draw_rng.uniform(-epsilon, epsilon);
    x = data::clip01(x);
    const double s = target.deployed_score(x, ref_embedding, &query_rng);
    ++r.samples;
    if (sign * s > best_key) {
      best_key = sign * s;
      r.best = x;
      r.best_score = s;
    }
    if (is_adversarial(s, target.threshold(), objective)) {
      if (!r.found) r.first_hit = n;
      r.found = true;
      if (stop_at_first) break;
    }
  }
  return r;
}

std::vector<SweepPoint> intensity_sweep(const std::vector<double>& intensities, int pairs,
                                        const std::function<bool(int, double)>& attack_one, unsigned jobs) {
  for (std::size_t i = 1; i < intensities.size(); ++i)
    if (intensities[i] < intensities[i - 1]) throw std::invalid_argument("intensity_sweep: intensities must ascend");
  std::vector<SweepPoint> curve;
  for (double level : intensities) {
    std::vector<char> hit(static_cast<std::size_t>(pairs));
    parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t p) { hit[p] = attack_one(static_cast<int>(p), level); },
                 jobs);
    SweepPoint pt{level, 0, pairs};
    for (char h : hit) pt.successes += h;
    curve.push_back(pt);
  }
  return curve;
}

bool sweep_monotone(const std::vector<SweepPoint>& curve, double sigmas) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double a = curve[i - 1].rate();
    const double b = curve[i].rate();
    const double n = std::max(1, curve[i].trials);
    const double pooled = 0.5 * (a + b);
    const double se = std::sqrt(std::max(pooled * (1.0 - pooled), 0.25 / n) * 2.0 / n);
    if (b < a - sigmas * se) return false;
  }
  return true;
}

}  // namespace imsp::attack
