#pragma once

#include <span>
#include <string>
#include <vector>

namespace ppds {

using DenseVector = std::vector<double>;

/// Row-major dense matrix of doubles. Problem sizes here are at most a few
/// hundred by a few thousand, so there is no sparse storage; determinism
/// matters more than speed.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const {
    return data.data() + static_cast<std::size_t>(i) * cols;
  }
  std::span<double> row_span(int i) {
    return {row(i), static_cast<std::size_t>(cols)};
  }
  std::span<const double> row_span(int i) const {
    return {row(i), static_cast<std::size_t>(cols)};
  }

  static DenseMatrix identity(int n);
  bool all_finite() const;
  bool operator==(const DenseMatrix&) const = default;
};

/// C = A * B. Each entry accumulates its sum left to right over the inner
/// index, so the result is bit-reproducible. Throws on dimension mismatch.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// y = A x and y = A^T x.
DenseVector matvec(const DenseMatrix& a, std::span<const double> x);
DenseVector matvec_transposed(const DenseMatrix& a, std::span<const double> x);

DenseMatrix transpose(const DenseMatrix& a);

/// Solves A x = b for symmetric positive definite A by Cholesky
/// factorization plus one iterative-refinement pass. Throws if a pivot is
/// not positive.
DenseVector solve_spd(const DenseMatrix& a, const DenseVector& b);

struct SpectralResult {
  double value = 0.0;   // largest absolute eigenvalue estimate
  bool converged = false;
  long iterations = 0;
};

/// Largest absolute eigenvalue of a symmetric matrix by power iteration
/// (deterministic all-ones start, relative tolerance 1e-12, at most 1e5
/// iterations). If the start vector lands in the kernel -- which happens for
/// every matrix of the form A^T(I-J)A with stochastic A -- the iteration
/// restarts once from a fixed pseudo-random vector. When the iteration does
/// not converge the last Rayleigh quotient is returned with converged=false.
/// Throws if the input is not square or deviates from symmetry by more than
/// 1e-12 (relative).
SpectralResult spectral_radius_symmetric(const DenseMatrix& s);

// small helpers shared across modules
double norm2(std::span<const double> x);          // Euclidean norm
double norm2_squared(std::span<const double> x);  // squared Euclidean norm
double dist2_squared(std::span<const double> x, std::span<const double> y);
DenseVector column_sums(const DenseMatrix& a);
DenseVector column_means(const DenseMatrix& a);

/// Plain text matrix files: first line "rows cols", then one row per line.
void save_matrix(const std::string& path, const DenseMatrix& a);
DenseMatrix load_matrix(const std::string& path);

}  // namespace ppds
