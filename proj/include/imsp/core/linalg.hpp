#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace imsp {

// Row-major to match the on-disk container and the (C,H,W) tensor layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Thrown when the Jacobi iteration hits its sweep cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct EigenOptions {
  double symmetry_tol = 1e-10;
  std::size_t max_dim = 4096;
  int max_sweeps = 100;
};

/// Eigenpairs sorted by descending eigenvalue. Columns of `vectors` are
/// orthonormal; each column's largest-magnitude entry is positive.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
  double residual = 0.0;  // max-abs entry of A - V diag(values) V^T
  int sweeps = 0;
  std::string warning;
};

EigenDecomposition sym_eigendecompose(const Matrix& a, const EigenOptions& opts = {});
EigenDecomposition sym_eigendecompose(const Matrix& a, double tol);

// Eigenpairs of (1/n) X^T X with nonzero eigenvalue, computed from the n x n
// Gram matrix (1/n) X X^T. Rows of `centered` must already be mean-centered.
EigenDecomposition gram_eigenbasis(const Matrix& centered, const EigenOptions& opts = {});

double max_abs(const Matrix& m);
double orthonormality_error(const Matrix& v);
double reconstruction_error(const Matrix& a, const EigenDecomposition& eig);

// Flips column signs so the largest-magnitude entry of each column is positive.
void canonicalize_signs(Matrix& vectors);

}  // namespace imsp
