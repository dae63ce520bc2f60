#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "imsp/core/linalg.hpp"

namespace imsp::pca {

/// Mean image plus the leading N orthonormal eigenvectors (columns) of the
/// fit-set covariance, eigenvalues descending.
struct EigenBasis {
  Vector mean;
  Matrix vectors;  // D x N
  Vector values;   // N
  std::uint64_t fit_hash = 0;

  int dim() const { return static_cast<int>(mean.size()); }
  int count() const { return static_cast<int>(vectors.cols()); }
};

// Rows of `images` are flattened samples. n must be at least 2 and N at most
// min(D, n) and no larger than the fit-set rank. Uses the Gram trick when
// n <= D, a direct covariance otherwise.
EigenBasis fit(const Matrix& images, int n_components);
EigenBasis fit(const std::vector<Vector>& images, int n_components);

// B_q B_q^T (x - mean) + mean, before clamping. `mask` has N entries in {0,1}.
Vector project_unclamped(const EigenBasis& basis, const Vector& mask, const Vector& x);
// Same, clamped to [0,1].
Vector project(const EigenBasis& basis, const Vector& mask, const Vector& x);

// Coefficients c = B^T (x - mean) for all N components.
Vector coefficients(const EigenBasis& basis, const Vector& x);
// sum_j mask_j c_j b_j (no mean).
Vector synthesize(const EigenBasis& basis, const Vector& mask, const Vector& coeffs);

// B_q B_q^T g: orthogonal projection of a direction onto span(B_q).
Vector project_direction(const EigenBasis& basis, const Vector& mask, const Vector& g);

Vector first_k_mask(const EigenBasis& basis, int k);
Vector classical_pca_defend(const EigenBasis& basis, int k, const Vector& x);

// First K components only, as a smaller basis sharing the mean.
EigenBasis truncated(const EigenBasis& basis, int k);

// Record sequence: meta 1x4 [D, N, hash_hi, hash_lo], mean, eigenvalues,
// eigenvector matrix (D x N), all IMSP containers.
void save_basis(const std::filesystem::path& path, const EigenBasis& basis);
EigenBasis load_basis(const std::filesystem::path& path);

std::uint64_t basis_hash(const EigenBasis& basis);

}  // namespace imsp::pca
