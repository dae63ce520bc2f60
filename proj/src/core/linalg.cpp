#include "imsp/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

namespace imsp {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double orthonormality_error(const Matrix& v) {
  if (v.cols() == 0) return 0.0;
  Matrix gram = v.transpose() * v;
  gram -= Matrix::Identity(v.cols(), v.cols());
  return max_abs(gram);
}

double reconstruction_error(const Matrix& a, const EigenDecomposition& eig) {
  Matrix recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  return max_abs(a - recon);
}

void canonicalize_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

namespace {

// Cyclic Jacobi on a dense symmetric copy. `rows` of vt hold the eigenvectors.
int jacobi_sweeps(std::vector<double>& a, std::vector<double>& vt, std::size_t n,
                  int max_sweeps, double& off_out) {
  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double stop = 1e-15 * fro;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = off_norm();
    off_out = off;
    if (off <= stop || fro == 0.0) return sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        double* row_p = &a[p * n];
        double* row_q = &a[q * n];
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = row_p[r];
          const double h = row_q[r];
          const double gp = g - s * (h + g * tau);
          const double hq = h + s * (g - h * tau);
          row_p[r] = gp;
          row_q[r] = hq;
          a[r * n + p] = gp;
          a[r * n + q] = hq;
        }
        double* vp = &vt[p * n];
        double* vq = &vt[q * n];
        for (std::size_t r = 0; r < n; ++r) {
          const double g = vp[r];
          const double h = vq[r];
          vp[r] = g - s * (h + g * tau);
          vq[r] = h + s * (g - h * tau);
        }
      }
    }
  }
  off_out = off_norm();
  return off_out <= stop ? max_sweeps : -1;
}

}  // namespace

EigenDecomposition sym_eigendecompose(const Matrix& a, double tol) {
  EigenOptions opts;
  opts.symmetry_tol = tol;
  return sym_eigendecompose(a, opts);
}

EigenDecomposition sym_eigendecompose(const Matrix& a, const EigenOptions& opts) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(
        fmt::format("sym_eigendecompose: matrix is {}x{}, not square", a.rows(), a.cols()));
  const auto n = static_cast<std::size_t>(a.rows());
  if (n > opts.max_dim)
    throw std::invalid_argument(
        fmt::format("sym_eigendecompose: dimension {} exceeds cap {}", n, opts.max_dim));
  if (!a.allFinite()) throw std::invalid_argument("sym_eigendecompose: non-finite entries");
  const double asym = max_abs(a - a.transpose());
  if (asym > opts.symmetry_tol)
    throw std::invalid_argument(
        fmt::format("sym_eigendecompose: asymmetry {:.3e} exceeds tolerance {:.3e}", asym,
                    opts.symmetry_tol));

  EigenDecomposition out;
  if (n == 0) return out;

  std::vector<double> work(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) work[i * n + j] = 0.5 * (a(i, j) + a(j, i));
  std::vector<double> vt(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;

  double off = 0.0;
  const int sweeps = jacobi_sweeps(work, vt, n, opts.max_sweeps, off);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return work[l * n + l] > work[r * n + r]; });

  out.values.resize(static_cast<Eigen::Index>(n));
  out.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values(j) = work[src * n + src];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = vt[src * n + r];
  }
  canonicalize_signs(out.vectors);
  out.residual = reconstruction_error(a, out);
  out.sweeps = sweeps;
  if (sweeps < 0)
    throw ConvergenceError(
        fmt::format("sym_eigendecompose: no convergence after {} sweeps (off-diagonal {:.3e}, "
                    "residual {:.3e})",
                    opts.max_sweeps, off, out.residual),
        out.residual);
  return out;
}

EigenDecomposition gram_eigenbasis(const Matrix& centered, const EigenOptions& opts) {
  const Eigen::Index n = centered.rows();
  const Eigen::Index d = centered.cols();
  if (n == 0) throw std::invalid_argument("gram_eigenbasis: no samples");
  if (n >= d)
    throw std::invalid_argument(
        fmt::format("gram_eigenbasis: needs fewer samples than dimensions (n={}, D={})", n, d));

  EigenDecomposition out;
  Matrix gram = centered * centered.transpose() / static_cast<double>(n);
  gram = 0.5 * (gram + gram.transpose()).eval();
  if (max_abs(gram) == 0.0) {
    out.values.resize(0);
    out.vectors.resize(d, 0);
    out.warning = "gram_eigenbasis: zero matrix, returning empty basis";
    return out;
  }
  EigenDecomposition small = sym_eigendecompose(gram, opts);

  const double cutoff = std::max(small.values(0), 0.0) * 1e-10;
  Eigen::Index keep = 0;
  while (keep < n && small.values(keep) > cutoff) ++keep;

  out.values = small.values.head(keep);
  out.vectors.resize(d, keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    Vector v = centered.transpose() * small.vectors.col(j);
    out.vectors.col(j) = v / v.norm();
  }
  // Two passes of modified Gram-Schmidt tighten orthogonality of the
  // small-eigenvalue columns, which lose accuracy in the lift.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < keep; ++j) {
      for (Eigen::Index i = 0; i < j; ++i)
        out.vectors.col(j) -= out.vectors.col(i).dot(out.vectors.col(j)) * out.vectors.col(i);
      out.vectors.col(j).normalize();
    }
  }
  canonicalize_signs(out.vectors);
  out.sweeps = small.sweeps;
  out.residual = small.residual;
  return out;
}

}  // namespace imsp
