#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "imsp/core/linalg.hpp"

namespace imsp {

/// Counter-based generator: draw i of stream s under seed k is a pure function
/// of (k, s, i), so streams can be handed to workers without coordination.
class SeededRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kAlgorithm = "splitmix64-counter/v1";

  explicit SeededRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent child stream; deterministic in (seed, stream, id).
  SeededRng derive(std::uint64_t id) const;

  std::uint64_t next_u64();
  double uniform();                          // [0, 1)
  double uniform(double lo, double hi);      // [lo, hi)
  double normal();                           // standard normal
  std::uint64_t uniform_index(std::uint64_t n);  // [0, n)
  bool bernoulli(double p);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

Vector gaussian_draw(SeededRng& rng, std::size_t n);

template <typename T>
void shuffle(std::vector<T>& items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace imsp
