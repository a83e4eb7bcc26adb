#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "phasekit/rng.hpp"

namespace phasekit {

using Complex = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

/// Dense complex matrix, row-major, immutable after construction.
class ComplexMatrix {
public:
  ComplexMatrix() = default;

  /// Throws DimensionError if entries.size() != rows * cols and
  /// std::invalid_argument if any entry is NaN or infinite.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return entries_.empty(); }

  const Complex &operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  std::span<const Complex> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }
  std::span<const Complex> entries() const { return entries_; }

  bool operator==(const ComplexMatrix &) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

ComplexVector matvec(const ComplexMatrix &m, std::span<const Complex> v);
ComplexVector matvec(const ComplexMatrix &m, std::span<const double> v);

/// m^H applied to v without forming the transpose.
ComplexVector adjoint_matvec(const ComplexMatrix &m, std::span<const Complex> v);

ComplexMatrix hermitian_transpose(const ComplexMatrix &m);

/// Plain (non-conjugating) transpose.
ComplexMatrix transpose(const ComplexMatrix &m);

ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b);

/// <u, v> = sum conj(u_i) v_i
Complex inner(std::span<const Complex> u, std::span<const Complex> v);
double norm(std::span<const Complex> v);
double norm(std::span<const double> v);

struct EigenPair {
  double value = 0.0;
  ComplexVector vector;
  std::size_t iterations = 0;
};

/// Largest (algebraic) eigenpair of a Hermitian matrix.
///
/// Power iteration from a fixed pseudo-random start vector, stopping when
/// successive Rayleigh quotients differ by at most tol times the latest one. If the
/// largest-magnitude eigenvalue turns out negative the matrix is shifted to
/// be positive semidefinite and the iteration repeated, so the returned value
/// is always the top of the spectrum. Throws std::invalid_argument for
/// non-square or non-Hermitian input (tolerance 1e-10 relative to the largest
/// entry).
EigenPair power_iteration(const ComplexMatrix &m, std::size_t iters, double tol);

/// Matrix-free variant for a Hermitian operator of dimension n given by its
/// action. The operator is trusted to be Hermitian.
using LinearMap = std::function<ComplexVector(std::span<const Complex>)>;
EigenPair power_iteration(const LinearMap &apply, std::size_t n, std::size_t iters, double tol);

/// Number of singular values above rel_tol * sigma_max, from a dense
/// eigensolve of m^H m.
std::size_t numerical_rank(const ComplexMatrix &m, double rel_tol);

/// rows x cols matrix of i.i.d. circular complex normals, E|a_ij|^2 = 1,
/// filled row-major from rng.
ComplexMatrix gaussian_complex(SeededRng &rng, std::size_t rows, std::size_t cols);

} // namespace phasekit
