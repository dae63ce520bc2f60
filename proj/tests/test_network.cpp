#include <gtest/gtest.h>

#include <sstream>

#include "imsp/nn/checkpoint.hpp"
#include "imsp/nn/network.hpp"
#include "imsp/nn/optimizer.hpp"

namespace imsp::nn {
namespace {

using L = LayerSpec;

Vector random_input(SeededRng& rng, int n) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

// Perturbs every parameter so PReLU slopes and biases are not at their
// symmetric init values.
ParamSet jittered(const NetworkSpec& spec, SeededRng& rng) {
  ParamSet p = init_params(spec, rng);
  for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values(i) += 0.1 * rng.normal();
  return p;
}

void expect_gradients_match(const NetworkSpec& spec, std::uint64_t seed_base) {
  for (int s = 0; s < 20; ++s) {
    SeededRng rng(seed_base + s);
    const ParamSet params = jittered(spec, rng);
    const Vector x = random_input(rng, spec.input_shape().size());
    const auto rep = grad_check(spec, params, x, rng, 150);
    EXPECT_LT(rep.max_rel_error, 1e-4) << spec.describe() << " seed " << s << " worst "
                                       << (rep.worst_is_input ? "input " : "param ") << rep.worst_index;
  }
}

TEST(GradCheck, Affine) { expect_gradients_match(NetworkSpec({7, 1, 1}, {L::affine(7, 5)}), 10); }

TEST(GradCheck, ConvStride1) {
  expect_gradients_match(NetworkSpec({2, 6, 6}, {L::conv2d(2, 3, 3, 1), L::flatten()}), 30);
}

TEST(GradCheck, ConvStride2) {
  expect_gradients_match(NetworkSpec({1, 7, 8}, {L::conv2d(1, 4, 3, 2), L::flatten()}), 50);
}

TEST(GradCheck, ConvKernel5) {
  expect_gradients_match(NetworkSpec({2, 6, 5}, {L::conv2d(2, 2, 5, 1), L::flatten()}), 70);
}

TEST(GradCheck, PReLU) {
  expect_gradients_match(NetworkSpec({3, 4, 4}, {L::conv2d(3, 3, 3, 1), L::prelu(3), L::flatten()}), 90);
  expect_gradients_match(NetworkSpec({6, 1, 1}, {L::affine(6, 6), L::prelu(6)}), 110);
}

TEST(GradCheck, Sigmoid) { expect_gradients_match(NetworkSpec({5, 1, 1}, {L::affine(5, 4), L::sigmoid()}), 130); }

TEST(GradCheck, L2Normalize) {
  expect_gradients_match(NetworkSpec({6, 1, 1}, {L::affine(6, 4), L::l2_normalize()}), 150);
}

TEST(GradCheck, ComposedStack) {
  const NetworkSpec spec({1, 8, 8}, {L::conv2d(1, 4, 3, 2), L::prelu(4), L::conv2d(4, 4, 3, 2), L::prelu(4),
                                     L::flatten(), L::affine(16, 8), L::prelu(8), L::affine(8, 5),
                                     L::l2_normalize()});
  expect_gradients_match(spec, 170);
}

TEST(Forward, ConvMatchesDirectSum) {
  // Independent oracle: explicit zero-padded correlation.
  SeededRng rng(1);
  const NetworkSpec spec({2, 5, 6}, {L::conv2d(2, 3, 3, 2)});
  const ParamSet p = jittered(spec, rng);
  const Vector x = random_input(rng, 60);
  const Vector y = evaluate(spec, p, x);
  const auto w = p.weight(spec, 0);  // out x (in*k*k)
  const auto b = p.bias(spec, 0);
  const Shape out = spec.output_shape();
  ASSERT_EQ(out.h, 3);
  ASSERT_EQ(out.w, 3);
  for (int o = 0; o < 3; ++o)
    for (int r = 0; r < out.h; ++r)
      for (int c = 0; c < out.w; ++c) {
        double s = b(o);
        for (int i = 0; i < 2; ++i)
          for (int kr = 0; kr < 3; ++kr)
            for (int kc = 0; kc < 3; ++kc) {
              const int rr = 2 * r + kr - 1;
              const int cc = 2 * c + kc - 1;
              if (rr < 0 || rr >= 5 || cc < 0 || cc >= 6) continue;
              s += w(o, (i * 3 + kr) * 3 + kc) * x(i * 30 + rr * 6 + cc);
            }
        EXPECT_NEAR(y(o * 9 + r * 3 + c), s, 1e-12);
      }
}

TEST(Forward, PReLUUsesSlopeAtAndBelowZero) {
  const NetworkSpec spec({1, 1, 3}, {L::prelu(1)});
  ParamSet p = zero_params(spec);
  p.weight(spec, 0)(0, 0) = 0.25;
  Vector x(3);
  x << -2.0, 0.0, 3.0;
  const Vector y = evaluate(spec, p, x);
  EXPECT_DOUBLE_EQ(y(0), -0.5);
  EXPECT_DOUBLE_EQ(y(1), 0.0);
  EXPECT_DOUBLE_EQ(y(2), 3.0);
}

TEST(Forward, SigmoidIsStableForLargeInputs) {
  const NetworkSpec spec({2, 1, 1}, {L::sigmoid()});
  Vector x(2);
  x << -800.0, 800.0;
  const Vector y = evaluate(spec, zero_params(spec), x);
  EXPECT_EQ(y(0), 0.0);
  EXPECT_EQ(y(1), 1.0);
}

TEST(Forward, L2NormalizeOutputHasUnitNorm) {
  const NetworkSpec spec({4, 1, 1}, {L::l2_normalize()});
  Vector x(4);
  x << 3.0, 0.0, 4.0, 0.0;
  const Vector y = evaluate(spec, zero_params(spec), x);
  EXPECT_NEAR(y.norm(), 1.0, 1e-15);
  EXPECT_TRUE(evaluate(spec, zero_params(spec), Vector::Zero(4)).allFinite());
}

TEST(Spec, RejectsMismatchedShapes) {
  EXPECT_THROW(NetworkSpec({5, 1, 1}, {L::affine(4, 3)}), std::invalid_argument);
  EXPECT_THROW(NetworkSpec({2, 4, 4}, {L::conv2d(3, 2, 3, 1)}), std::invalid_argument);
  EXPECT_THROW(NetworkSpec({3, 1, 1}, {}), std::invalid_argument);
}

TEST(Spec, PrefixAndExtensionShareLayout) {
  const NetworkSpec base({4, 1, 1}, {L::affine(4, 3), L::prelu(3), L::affine(3, 2)});
  const NetworkSpec ext = base.extended({L::sigmoid(), L::affine(2, 5)});
  EXPECT_EQ(ext.prefix(3).describe(), base.describe());
  EXPECT_EQ(ext.prefix(3).param_count(), base.param_count());
  SeededRng rng(2);
  const ParamSet full = init_params(ext, rng);
  ParamSet head;
  head.values = full.values.head(static_cast<Eigen::Index>(base.param_count()));
  const Vector x = random_input(rng, 4);
  const Vector y_full_prefix = evaluate(ext.prefix(3), head, x);
  EXPECT_EQ(y_full_prefix, evaluate(base, head, x));
  EXPECT_NE(base.hash(), ext.hash());
}

TEST(Tape, SecondBackwardThrows) {
  const NetworkSpec spec({3, 1, 1}, {L::affine(3, 2)});
  SeededRng rng(3);
  const ParamSet p = init_params(spec, rng);
  auto fr = forward(spec, p, Vector::Ones(3));
  backward(fr.tape, Vector::Ones(2));
  EXPECT_THROW(backward(fr.tape, Vector::Ones(2)), std::logic_error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const NetworkSpec spec({1, 6, 6}, {L::conv2d(1, 2, 3, 2), L::prelu(2), L::flatten(), L::affine(18, 4)});
  SeededRng rng(4);
  const ParamSet p = jittered(spec, rng);
  std::stringstream ss;
  write_params(ss, spec, p);
  const ParamSet back = read_params(ss, spec);
  EXPECT_EQ(back.values, p.values);
  EXPECT_EQ(params_hash(back), params_hash(p));
}

TEST(Checkpoint, RejectsDifferentArchitecture) {
  const NetworkSpec a({4, 1, 1}, {L::affine(4, 3)});
  const NetworkSpec b({4, 1, 1}, {L::affine(4, 2)});
  SeededRng rng(5);
  std::stringstream ss;
  write_params(ss, a, init_params(a, rng));
  EXPECT_THROW(read_params(ss, b), std::runtime_error);
}

TEST(Optimizer, ConstantGradientFollowsGeometricSeries) {
  const NetworkSpec spec({1, 1, 1}, {L::affine(1, 1)});
  ParamSet p = zero_params(spec);
  auto st = make_optimizer(p, LrSchedule{0.1, 0, 0.5}, 0.9);
  const Vector g = Vector::Ones(static_cast<Eigen::Index>(spec.param_count()));
  for (int t = 1; t <= 12; ++t) {
    ASSERT_TRUE(sgd_momentum_step(p, g, st));
    // theta_t = -lr * sum_{s=1..t} (1 - mu^s) / (1 - mu)
    double want = 0.0;
    for (int s = 1; s <= t; ++s) want -= 0.1 * (1.0 - std::pow(0.9, s)) / 0.1;
    EXPECT_NEAR(p.values(0), want, 1e-12);
  }
}

TEST(Optimizer, ScheduleHalvesEveryDecayPeriod) {
  const LrSchedule s{0.01, 20, 0.5};
  EXPECT_DOUBLE_EQ(s.at(0), 0.01);
  EXPECT_DOUBLE_EQ(s.at(19), 0.01);
  EXPECT_DOUBLE_EQ(s.at(20), 0.005);
  EXPECT_DOUBLE_EQ(s.at(45), 0.0025);
  EXPECT_DOUBLE_EQ((LrSchedule{0.01, 0, 0.5}).at(100), 0.01);
}

TEST(Optimizer, NonFiniteGradientIsSkipped) {
  const NetworkSpec spec({2, 1, 1}, {L::affine(2, 1)});
  ParamSet p = zero_params(spec);
  auto st = make_optimizer(p, LrSchedule{0.1, 0, 0.5}, 0.9);
  Vector g = Vector::Ones(3);
  g(1) = std::nan("");
  EXPECT_FALSE(sgd_momentum_step(p, g, st));
  EXPECT_EQ(st.skipped, 1);
  EXPECT_EQ(p.values, Vector::Zero(3));
  EXPECT_EQ(st.velocity, Vector::Zero(3));
}

}  // namespace
}  // namespace imsp::nn
