#include "imsp/pca/basis.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/core/binary_io.hpp"
#include "imsp/core/hash.hpp"

namespace imsp::pca {

namespace {

void check_mask(const EigenBasis& basis, const Vector& mask, const Vector& x) {
  if (mask.size() != basis.count())
    throw std::invalid_argument(fmt::format("mask has {} entries, basis has {}", mask.size(), basis.count()));
  if (x.size() != basis.dim())
    throw std::invalid_argument(fmt::format("image has {} pixels, basis expects {}", x.size(), basis.dim()));
}

}  // namespace

EigenBasis fit(const Matrix& images, int n_components) {
  const auto n = images.rows();
  const auto d = images.cols();
  if (n < 2) throw std::invalid_argument("fit: need at least 2 images");
  if (n_components < 0 || n_components > std::min<Eigen::Index>(n, d))
    throw std::invalid_argument(
        fmt::format("fit: {} components requested from {} images of dimension {}", n_components, n, d));

  EigenBasis basis;
  basis.mean = images.colwise().mean().transpose();
  Matrix centered = images.rowwise() - basis.mean.transpose();
  if (max_abs(centered) == 0.0)
    throw std::invalid_argument("fit: all images identical, covariance is zero");

  EigenDecomposition eig;
  if (n < d) {
    eig = gram_eigenbasis(centered);
  } else {
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n);
    eig = sym_eigendecompose(cov, EigenOptions{1e-8, 4096, 100});
  }
  if (eig.values.size() < n_components)
    throw std::invalid_argument(fmt::format("fit: fit set has rank {}, {} components requested",
                                            eig.values.size(), n_components));
  basis.vectors = eig.vectors.leftCols(n_components);
  basis.values = eig.values.head(n_components).cwiseMax(0.0);
  Hasher h;
  h.mat(images);
  basis.fit_hash = h.digest();
  return basis;
}

EigenBasis fit(const std::vector<Vector>& images, int n_components) {
  if (images.empty()) throw std::invalid_argument("fit: no images");
  Matrix m(static_cast<Eigen::Index>(images.size()), images.front().size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].size() != m.cols()) throw std::invalid_argument("fit: images differ in size");
    m.row(static_cast<Eigen::Index>(i)) = images[i].transpose();
  }
  return fit(m, n_components);
}

Vector coefficients(const EigenBasis& basis, const Vector& x) {
  return basis.vectors.transpose() * (x - basis.mean);
}

Vector synthesize(const EigenBasis& basis, const Vector& mask, const Vector& coeffs) {
  return basis.vectors * mask.cwiseProduct(coeffs);
}

Vector project_unclamped(const EigenBasis& basis, const Vector& mask, const Vector& x) {
  check_mask(basis, mask, x);
  return synthesize(basis, mask, coefficients(basis, x)) + basis.mean;
}

Vector project(const EigenBasis& basis, const Vector& mask, const Vector& x) {
  return project_unclamped(basis, mask, x).cwiseMax(0.0).cwiseMin(1.0);
}

Vector project_direction(const EigenBasis& basis, const Vector& mask, const Vector& g) {
  check_mask(basis, mask, g);
  return basis.vectors * mask.cwiseProduct(basis.vectors.transpose() * g);
}

Vector first_k_mask(const EigenBasis& basis, int k) {
  if (k < 0 || k > basis.count())
    throw std::invalid_argument(fmt::format("K={} outside [0, {}]", k, basis.count()));
  Vector m = Vector::Zero(basis.count());
  m.head(k).setOnes();
  return m;
}

Vector classical_pca_defend(const EigenBasis& basis, int k, const Vector& x) {
  return project(basis, first_k_mask(basis, k), x);
}

EigenBasis truncated(const EigenBasis& basis, int k) {
  if (k < 0 || k > basis.count())
    throw std::invalid_argument(fmt::format("K={} outside [0, {}]", k, basis.count()));
  EigenBasis out;
  out.mean = basis.mean;
  out.vectors = basis.vectors.leftCols(k);
  out.values = basis.values.head(k);
  out.fit_hash = basis.fit_hash;
  return out;
}

void save_basis(const std::filesystem::path& path, const EigenBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  Matrix meta(1, 4);
  meta << basis.dim(), basis.count(), static_cast<double>(basis.fit_hash >> 32),
      static_cast<double>(basis.fit_hash & 0xffffffffULL);
  write_matrix(out, meta);
  write_vector(out, basis.mean);
  write_vector(out, basis.values);
  write_matrix(out, basis.vectors);
  if (!out) throw std::runtime_error(fmt::format("write failed: {}", path.string()));
}

EigenBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  const Matrix meta = read_matrix(in);
  if (meta.rows() != 1 || meta.cols() != 4) throw FormatError("basis file: bad meta record");
  EigenBasis b;
  b.mean = read_vector(in);
  b.values = read_vector(in);
  b.vectors = read_matrix(in);
  const auto d = static_cast<Eigen::Index>(meta(0, 0));
  const auto n = static_cast<Eigen::Index>(meta(0, 1));
  if (b.mean.size() != d || b.values.size() != n || b.vectors.rows() != d || b.vectors.cols() != n)
    throw FormatError(fmt::format("basis file: records disagree with header D={} N={}", d, n));
  b.fit_hash = (static_cast<std::uint64_t>(meta(0, 2)) << 32) | static_cast<std::uint64_t>(meta(0, 3));
  return b;
}

std::uint64_t basis_hash(const EigenBasis& basis) {
  return Hasher{}.vec(basis.mean).vec(basis.values).mat(basis.vectors).u64(basis.fit_hash).digest();
}

}  // namespace imsp::pca
