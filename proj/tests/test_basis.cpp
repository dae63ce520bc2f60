#include <gtest/gtest.h>

#include <filesystem>

#include "imsp/core/rng.hpp"
#include "imsp/pca/basis.hpp"

namespace imsp::pca {
namespace {

Matrix sample_images(SeededRng& rng, int n, int d) {
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = 0.5 + 0.1 * rng.normal() / (1.0 + 0.2 * j);
  return x;
}

Vector random_mask(SeededRng& rng, int n) {
  Vector q(n);
  for (int j = 0; j < n; ++j) q(j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return q;
}

Vector random_vec(SeededRng& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v(j) = scale * rng.normal();
  return v;
}

// 100 seeded cases of the projection laws on B_q B_q^T (x - m) + m.
TEST(ProjectionLaws, HoldOnSeededCases) {
  for (int s = 0; s < 100; ++s) {
    SeededRng rng(1000 + s);
    const int d = 20 + s % 13;
    const int n = 30;
    const int comps = 6 + s % 8;
    const EigenBasis b = fit(sample_images(rng, n, d), comps);
    const Vector q = random_mask(rng, comps);
    const Vector x = random_vec(rng, d, 0.3).array() + 0.5;
    const Vector y = random_vec(rng, d, 0.3).array() + 0.5;

    const Vector px = project_unclamped(b, q, x);
    // Idempotence.
    EXPECT_LE((project_unclamped(b, q, px) - px).cwiseAbs().maxCoeff(), 1e-8);
    // Noise orthogonal to every basis vector is annihilated.
    Vector noise = random_vec(rng, d);
    noise -= b.vectors * (b.vectors.transpose() * noise);
    EXPECT_LE((project_unclamped(b, q, x + noise) - px).cwiseAbs().maxCoeff(), 1e-8);
    // Affine linearity around the mean.
    const double a1 = rng.uniform(-2.0, 2.0);
    const double a2 = rng.uniform(-2.0, 2.0);
    const Vector lhs = project_unclamped(b, q, b.mean + a1 * (x - b.mean) + a2 * (y - b.mean)) - b.mean;
    const Vector rhs = a1 * (px - b.mean) + a2 * (project_unclamped(b, q, y) - b.mean);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
    // Empty mask returns the mean.
    EXPECT_LE((project_unclamped(b, Vector::Zero(comps), x) - b.mean).cwiseAbs().maxCoeff(), 1e-8);
    // Direction projector agrees with the affine map.
    EXPECT_LE((project_direction(b, q, x - y) - (px - project_unclamped(b, q, y))).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProjectionLaws, FullBasisIsIdentity) {
  for (int s = 0; s < 100; ++s) {
    SeededRng rng(3000 + s);
    const int d = 8 + s % 6;
    const EigenBasis b = fit(sample_images(rng, 3 * d, d), d);
    const Vector x = random_vec(rng, d);
    EXPECT_LE((project_unclamped(b, Vector::Ones(d), x) - x).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProjectionLaws, ClampedProjectionStaysInUnitBox) {
  SeededRng rng(4);
  const EigenBasis b = fit(sample_images(rng, 30, 20), 10);
  const Vector x = random_vec(rng, 20, 3.0);
  const Vector p = project(b, Vector::Ones(10), x);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
}

TEST(Fit, GramAndCovariancePathsAgree) {
  // n < D goes through the Gram matrix, n >= D through the covariance; both
  // must describe the same leading subspace of the same data.
  SeededRng rng(5);
  const Matrix x = sample_images(rng, 23, 24);
  const EigenBasis a = fit(x, 8);
  Matrix x2(24, 24);
  x2 << x, x.colwise().mean();  // the mean row leaves mean and covariance shape unchanged up to scale
  const EigenBasis b = fit(x2, 8);
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.values * 23.0 / 24.0 - b.values).cwiseAbs().maxCoeff(), 1e-8);
  for (int c = 0; c < 8; ++c) EXPECT_NEAR(std::abs(a.vectors.col(c).dot(b.vectors.col(c))), 1.0, 1e-8);
}

TEST(Fit, ValuesDescendAndVectorsAreOrthonormal) {
  SeededRng rng(6);
  const EigenBasis b = fit(sample_images(rng, 40, 30), 12);
  for (int j = 1; j < 12; ++j) EXPECT_GE(b.values(j - 1), b.values(j));
  const Matrix g = b.vectors.transpose() * b.vectors;
  EXPECT_LE((g - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fit, RejectsDegenerateInput) {
  Matrix same(5, 10);
  same.setConstant(0.3);
  EXPECT_THROW(fit(same, 2), std::invalid_argument);
  SeededRng rng(7);
  EXPECT_THROW(fit(sample_images(rng, 5, 10), 6), std::invalid_argument);  // rank <= 4
  EXPECT_THROW(fit(sample_images(rng, 1, 10), 1), std::invalid_argument);
}

TEST(Classical, FirstKMaskAndTruncationAgree) {
  SeededRng rng(8);
  const EigenBasis b = fit(sample_images(rng, 40, 25), 15);
  const Vector x = random_vec(rng, 25, 0.1).array() + 0.5;
  const EigenBasis t = truncated(b, 5);
  EXPECT_EQ(t.count(), 5);
  EXPECT_LE((classical_pca_defend(b, 5, x) - project(t, Vector::Ones(5), x)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(first_k_mask(b, 5).sum(), 5.0);
  EXPECT_THROW(first_k_mask(b, 16), std::invalid_argument);
}

TEST(Classical, CoefficientsSynthesizeBack) {
  SeededRng rng(9);
  const EigenBasis b = fit(sample_images(rng, 40, 20), 20);
  const Vector x = random_vec(rng, 20);
  const Vector c = coefficients(b, x);
  EXPECT_LE((synthesize(b, Vector::Ones(20), c) + b.mean - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BasisFile, RoundTripKeepsHash) {
  SeededRng rng(10);
  const EigenBasis b = fit(sample_images(rng, 30, 16), 7);
  const auto path = std::filesystem::temp_directory_path() / "imsp_test_basis.imsp";
  save_basis(path, b);
  const EigenBasis back = load_basis(path);
  EXPECT_EQ(back.vectors, b.vectors);
  EXPECT_EQ(back.values, b.values);
  EXPECT_EQ(back.mean, b.mean);
  EXPECT_EQ(back.fit_hash, b.fit_hash);
  EXPECT_EQ(basis_hash(back), basis_hash(b));
  std::filesystem::remove(path);
}

TEST(Projection, RejectsWrongSizes) {
  SeededRng rng(11);
  const EigenBasis b = fit(sample_images(rng, 30, 16), 7);
  EXPECT_THROW(project(b, Vector::Ones(6), Vector::Zero(16)), std::invalid_argument);
  EXPECT_THROW(project(b, Vector::Ones(7), Vector::Zero(15)), std::invalid_argument);
}

}  // namespace
}  // namespace imsp::pca
