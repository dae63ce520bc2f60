#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"

namespace imsp {
namespace {

Matrix random_symmetric(SeededRng& rng, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
  return a;
}

Matrix random_data(SeededRng& rng, int n, int d) {
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal() * (1.0 + 3.0 / (1 + j));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  return x;
}

TEST(Jacobi, MatchesReferenceSolverOnRandomSymmetric) {
  for (int seed = 0; seed < 20; ++seed) {
    SeededRng rng(100 + seed);
    const int n = 3 + seed % 17;
    const Matrix a = random_symmetric(rng, n);
    const auto eig = sym_eigendecompose(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref{Eigen::MatrixXd(a)};
    Eigen::VectorXd want = ref.eigenvalues().reverse();
    EXPECT_LE((eig.values - want).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed;
    EXPECT_LE(orthonormality_error(eig.vectors), 1e-10);
    EXPECT_LE(reconstruction_error(a, eig), 1e-8);
  }
}

TEST(Jacobi, ValuesDescendAndSignsAreCanonical) {
  SeededRng rng(5);
  const auto eig = sym_eigendecompose(random_symmetric(rng, 12));
  for (int i = 1; i < eig.values.size(); ++i) EXPECT_GE(eig.values(i - 1), eig.values(i));
  for (int c = 0; c < eig.vectors.cols(); ++c) {
    Eigen::Index r;
    eig.vectors.col(c).cwiseAbs().maxCoeff(&r);
    EXPECT_GT(eig.vectors(r, c), 0.0);
  }
}

TEST(Jacobi, DiagonalInputIsReturnedSorted) {
  Matrix a = Matrix::Zero(4, 4);
  a.diagonal() << 1.0, 4.0, -2.0, 3.0;
  const auto eig = sym_eigendecompose(a);
  EXPECT_DOUBLE_EQ(eig.values(0), 4.0);
  EXPECT_DOUBLE_EQ(eig.values(3), -2.0);
  EXPECT_EQ(eig.sweeps, 0);
}

TEST(Jacobi, RejectsAsymmetricInput) {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 2) = 0.5;
  EXPECT_THROW(sym_eigendecompose(a), std::invalid_argument);
}

TEST(Jacobi, RejectsOversizedInput) {
  EigenOptions opts;
  opts.max_dim = 4;
  EXPECT_THROW(sym_eigendecompose(Matrix::Identity(5, 5), opts), std::invalid_argument);
}

TEST(Jacobi, SweepCapRaisesConvergenceError) {
  SeededRng rng(9);
  EigenOptions opts;
  opts.max_sweeps = 1;
  EXPECT_THROW(sym_eigendecompose(random_symmetric(rng, 30), opts), ConvergenceError);
}

TEST(GramTrick, AgreesWithDirectCovariance) {
  for (int seed = 0; seed < 20; ++seed) {
    SeededRng rng(200 + seed);
    const int n = 6 + seed % 5;
    const int d = 25 + seed;
    const Matrix x = random_data(rng, n, d);
    const auto gram = gram_eigenbasis(x);
    const Matrix cov = x.transpose() * x / n;
    const auto direct = sym_eigendecompose(cov);
    const auto k = gram.values.size();
    ASSERT_LE(k, n);
    ASSERT_GE(k, n - 1);
    EXPECT_LE((gram.values - direct.values.head(k)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(orthonormality_error(gram.vectors), 1e-10);
    // Same subspace and, after sign canonicalization, the same vectors.
    for (Eigen::Index c = 0; c < k; ++c) {
      const double dot = std::abs(gram.vectors.col(c).dot(direct.vectors.col(c)));
      EXPECT_NEAR(dot, 1.0, 1e-8) << "seed " << seed << " col " << c;
    }
    const Matrix proj_resid = cov * gram.vectors - gram.vectors * gram.values.asDiagonal();
    EXPECT_LE(max_abs(proj_resid), 1e-8);
  }
}

TEST(GramTrick, ReconstructsCenteredRows) {
  SeededRng rng(3);
  const Matrix x = random_data(rng, 8, 40);
  const auto gram = gram_eigenbasis(x);
  const Matrix recon = x * gram.vectors * gram.vectors.transpose();
  EXPECT_LE(max_abs(recon - x), 1e-8);
}

}  // namespace
}  // namespace imsp
