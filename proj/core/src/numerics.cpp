#include "phasekit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "phasekit/errors.hpp"

namespace phasekit {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("ComplexMatrix: " + std::to_string(entries_.size()) + " entries for a " +
                         std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
  }
  for (const auto &e : entries_) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
      throw std::invalid_argument("ComplexMatrix: non-finite entry");
    }
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  std::vector<Complex> e(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i * n + i] = 1.0;
  }
  return {n, n, std::move(e)};
}

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

RowMajorMap as_eigen(const ComplexMatrix &m) {
  return {m.entries().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<const Eigen::VectorXcd> as_eigen_vector(std::span<const Complex> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Eigen::Map<Eigen::VectorXcd> as_eigen_vector(ComplexVector &v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_cols(const ComplexMatrix &m, std::size_t len, const char *what) {
  if (len != m.cols()) {
    throw DimensionError(std::string(what) + ": vector length " + std::to_string(len) +
                         " != matrix columns " + std::to_string(m.cols()));
  }
}

} // namespace

ComplexVector matvec(const ComplexMatrix &m, std::span<const Complex> v) {
  check_cols(m, v.size(), "matvec");
  ComplexVector out(m.rows());
  if (!m.empty()) {
    as_eigen_vector(out) = as_eigen(m) * as_eigen_vector(v);
  }
  return out;
}

ComplexVector matvec(const ComplexMatrix &m, std::span<const double> v) {
  check_cols(m, v.size(), "matvec");
  ComplexVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      re += row[c].real() * v[c];
      im += row[c].imag() * v[c];
    }
    out[r] = {re, im};
  }
  return out;
}

ComplexVector adjoint_matvec(const ComplexMatrix &m, std::span<const Complex> v) {
  if (v.size() != m.rows()) {
    throw DimensionError("adjoint_matvec: vector length " + std::to_string(v.size()) +
                         " != matrix rows " + std::to_string(m.rows()));
  }
  ComplexVector out(m.cols());
  if (!m.empty()) {
    as_eigen_vector(out) = as_eigen(m).adjoint() * as_eigen_vector(v);
  }
  return out;
}

ComplexMatrix hermitian_transpose(const ComplexMatrix &m) {
  std::vector<Complex> e(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      e[c * m.rows() + r] = std::conj(m(r, c));
    }
  }
  return {m.cols(), m.rows(), std::move(e)};
}

ComplexMatrix transpose(const ComplexMatrix &m) {
  std::vector<Complex> e(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      e[c * m.rows() + r] = m(r, c);
    }
  }
  return {m.cols(), m.rows(), std::move(e)};
}

ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  std::vector<Complex> e(a.rows() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex *out = e.data() + i * b.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < brow.size(); ++j) {
        out[j] += aik * brow[j];
      }
    }
  }
  return {a.rows(), b.cols(), std::move(e)};
}

Complex inner(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) {
    throw DimensionError("inner: length mismatch");
  }
  Complex acc{};
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += std::conj(u[i]) * v[i];
  }
  return acc;
}

double norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto &c : v) {
    s += std::norm(c);
  }
  return std::sqrt(s);
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

namespace {

void check_hermitian(const ComplexMatrix &m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("power_iteration: matrix is not square");
  }
  double scale = 0.0;
  for (const auto &e : m.entries()) {
    scale = std::max(scale, std::abs(e));
  }
  const double tol = 1e-10 * std::max(scale, 1.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = r; c < m.cols(); ++c) {
      if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) {
        throw std::invalid_argument("power_iteration: matrix is not Hermitian");
      }
    }
  }
}

EigenPair run_power(const LinearMap &apply, std::size_t n, double shift, std::size_t iters,
                    double tol) {
  SeededRng rng(0x5eed'0f'90'e7ULL);
  ComplexVector v(n);
  for (auto &c : v) {
    c = rng.complex_normal();
  }
  const double nv = norm(v);
  for (auto &c : v) {
    c /= nv;
  }

  EigenPair out;
  double rayleigh = 0.0;
  bool have_prev = false;
  for (std::size_t k = 0; k < iters; ++k) {
    ComplexVector w = apply(v);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += shift * v[i];
    }
    // v is unit norm, so <v, (M + shift) v> is the shifted Rayleigh quotient.
    const double next = inner(v, w).real();
    const double nw = norm(w);
    out.iterations = k + 1;
    if (nw == 0.0) {
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = w[i] / nw;
    }
    const bool converged = have_prev && std::abs(next - rayleigh) <= tol * std::abs(next);
    rayleigh = next;
    have_prev = true;
    if (converged) {
      break;
    }
  }
  out.value = inner(v, apply(v)).real();
  out.vector = std::move(v);
  return out;
}

} // namespace

EigenPair power_iteration(const LinearMap &apply, std::size_t n, std::size_t iters, double tol) {
  if (n == 0) {
    throw std::invalid_argument("power_iteration: empty operator");
  }
  EigenPair dominant = run_power(apply, n, 0.0, iters, tol);
  if (dominant.value >= 0.0) {
    return dominant;
  }
  // The largest-magnitude eigenvalue is negative; shift it to zero so the top
  // of the spectrum dominates.
  EigenPair top = run_power(apply, n, -dominant.value, iters, tol);
  return top.value >= dominant.value ? top : dominant;
}

EigenPair power_iteration(const ComplexMatrix &m, std::size_t iters, double tol) {
  check_hermitian(m);
  return power_iteration([&m](std::span<const Complex> v) { return matvec(m, v); }, m.rows(),
                         iters, tol);
}

std::size_t numerical_rank(const ComplexMatrix &m, double rel_tol) {
  if (m.empty()) {
    throw std::invalid_argument("numerical_rank: empty matrix");
  }
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw std::invalid_argument("numerical_rank: rel_tol must lie in (0, 1)");
  }
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> map(m.entries().data(), static_cast<Eigen::Index>(m.rows()),
                                       static_cast<Eigen::Index>(m.cols()));
  const Eigen::MatrixXcd gram = map.adjoint() * map;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("numerical_rank: eigensolver did not converge");
  }
  const Eigen::VectorXd &eig = solver.eigenvalues();
  const double sigma_max = std::sqrt(std::max(eig.maxCoeff(), 0.0));
  if (sigma_max == 0.0) {
    return 0;
  }
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (std::sqrt(std::max(eig[i], 0.0)) > rel_tol * sigma_max) {
      ++rank;
    }
  }
  return rank;
}

ComplexMatrix gaussian_complex(SeededRng &rng, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("gaussian_complex: rows and cols must be >= 1");
  }
  std::vector<Complex> e(rows * cols);
  for (auto &c : e) {
    c = rng.complex_normal();
  }
  return {rows, cols, std::move(e)};
}

} // namespace phasekit
