#include "phasekit/sensing.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "byteio.hpp"
#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

std::vector<double> squared_row_norms(const ComplexMatrix &m) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (const auto &c : m.row(r)) {
      s += std::norm(c);
    }
    out[r] = s;
  }
  return out;
}

void check_square(const ComplexMatrix &d, std::size_t n, const char *name) {
  if (d.rows() != n || d.cols() != n) {
    throw DimensionError(std::string("diffraction matrix ") + name + " must be " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
}

} // namespace

SensingOperator::SensingOperator(ComplexMatrix matrix, SensingKind kind)
    : matrix_(std::move(matrix)), kind_(kind), row_norms_sq_(squared_row_norms(matrix_)) {
  if (matrix_.rows() == 0 || matrix_.cols() == 0) {
    throw DimensionError("SensingOperator: needs at least one row and one column");
  }
  for (std::size_t r = 0; r < row_norms_sq_.size(); ++r) {
    if (!(row_norms_sq_[r] > 0.0)) {
      throw std::invalid_argument("SensingOperator: row " + std::to_string(r) + " has zero norm");
    }
  }
}

SensingOperator SensingOperator::head(std::size_t m) const {
  if (m == 0 || m > rows()) {
    throw DimensionError("SensingOperator::head: invalid row count " + std::to_string(m));
  }
  const auto e = matrix_.entries();
  std::vector<Complex> sub(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(m * cols()));
  return {ComplexMatrix(m, cols(), std::move(sub)), kind_};
}

Measurements intensity_forward(const SensingOperator &a, std::span<const double> x) {
  const ComplexVector u = matvec(a.matrix(), x);
  Measurements y(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    y[i] = std::norm(u[i]);
  }
  return y;
}

ComplexMatrix build_diffraction_matrix(const DiffractionSpec &spec) {
  if (!(spec.wavelength > 0.0) || !(spec.pixel_pitch > 0.0)) {
    throw std::invalid_argument("build_diffraction_matrix: wavelength and pixel pitch must be > 0");
  }
  if (!(spec.distance > 0.0)) {
    throw std::invalid_argument(
        "build_diffraction_matrix: distance must be > 0 (use ComplexMatrix::identity for d = 0)");
  }
  if (spec.grid_side == 0 || spec.grid_side > 64) {
    throw std::invalid_argument("build_diffraction_matrix: grid_side must be in [1, 64]");
  }
  const std::size_t side = spec.grid_side;
  const std::size_t n = side * side;
  const double lambda = spec.wavelength;
  const double d = spec.distance;
  const double dx = spec.pixel_pitch;
  using std::numbers::pi;

  const Complex prefactor = (dx * dx) / (Complex(0.0, 1.0) * lambda * d) *
                            std::polar(1.0, std::fmod(2.0 * pi * d / lambda, 2.0 * pi));

  // The kernel separates into x and y chirps indexed by the pixel offset.
  std::vector<Complex> chirp(2 * side - 1);
  for (std::size_t k = 0; k < chirp.size(); ++k) {
    const double offset = (static_cast<double>(k) - static_cast<double>(side - 1)) * dx;
    chirp[k] = std::polar(1.0, pi * offset * offset / (lambda * d));
  }

  std::vector<Complex> e(n * n);
  for (std::size_t rk = 0; rk < side; ++rk) {
    for (std::size_t ck = 0; ck < side; ++ck) {
      Complex *row = e.data() + (rk * side + ck) * n;
      for (std::size_t rj = 0; rj < side; ++rj) {
        const Complex cy = prefactor * chirp[rk + side - 1 - rj];
        for (std::size_t cj = 0; cj < side; ++cj) {
          row[rj * side + cj] = cy * chirp[ck + side - 1 - cj];
        }
      }
    }
  }
  return {n, n, std::move(e)};
}

MaskSet generate_masks(SeededRng &rng, std::size_t count, std::size_t n, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("generate_masks: p must lie in (0, 1)");
  }
  MaskSet set;
  set.bernoulli_p = p;
  set.masks.resize(count);
  for (auto &mask : set.masks) {
    mask.resize(n);
    for (auto &bit : mask) {
      bit = rng.bernoulli(p) ? 1 : 0;
    }
  }
  return set;
}

SensingOperator effective_rows(const MaskSet &masks, const ComplexMatrix &d_ms,
                               const ComplexMatrix &d_sd) {
  const std::size_t n = d_ms.rows();
  check_square(d_ms, n, "D_ms");
  check_square(d_sd, n, "D_sd");
  if (masks.count() == 0) {
    throw DimensionError("effective_rows: empty mask set");
  }

  // Detector sums the output plane: weight of scene pixel k is sum_j D_sd[j, k].
  std::vector<Complex> detector_weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = d_sd.row(j);
    for (std::size_t k = 0; k < n; ++k) {
      detector_weight[k] += row[k];
    }
  }
  // Columns of D_ms as contiguous rows so each mask accumulates its open pixels.
  const ComplexMatrix d_ms_t = transpose(d_ms);

  std::vector<Complex> e(masks.count() * n);
  std::vector<Complex> field(n);
  for (std::size_t i = 0; i < masks.count(); ++i) {
    const auto &mask = masks.masks[i];
    if (mask.size() != n) {
      throw DimensionError("effective_rows: mask " + std::to_string(i) + " has length " +
                           std::to_string(mask.size()) + ", expected " + std::to_string(n));
    }
    std::fill(field.begin(), field.end(), Complex{});
    for (std::size_t k = 0; k < n; ++k) {
      if (mask[k] != 0) {
        const auto col = d_ms_t.row(k);
        for (std::size_t j = 0; j < n; ++j) {
          field[j] += col[j];
        }
      }
    }
    Complex *row = e.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = detector_weight[j] * field[j];
    }
  }
  return {ComplexMatrix(masks.count(), n, std::move(e)), SensingKind::Diffraction};
}

Measurements physical_forward(const MaskSet &masks, const ComplexMatrix &d_ms,
                              const ComplexMatrix &d_sd, std::span<const double> x) {
  const std::size_t n = d_ms.rows();
  check_square(d_ms, n, "D_ms");
  check_square(d_sd, n, "D_sd");
  if (x.size() != n) {
    throw DimensionError("physical_forward: scene length " + std::to_string(x.size()) +
                         " != " + std::to_string(n));
  }
  Measurements y(masks.count());
  std::vector<double> pattern(n);
  for (std::size_t i = 0; i < masks.count(); ++i) {
    const auto &mask = masks.masks[i];
    if (mask.size() != n) {
      throw DimensionError("physical_forward: mask length mismatch");
    }
    for (std::size_t k = 0; k < n; ++k) {
      pattern[k] = mask[k];
    }
    ComplexVector at_scene = matvec(d_ms, std::span<const double>(pattern));
    for (std::size_t k = 0; k < n; ++k) {
      at_scene[k] *= x[k];
    }
    const ComplexVector at_detector = matvec(d_sd, std::span<const Complex>(at_scene));
    Complex total{};
    for (const auto &c : at_detector) {
      total += c;
    }
    y[i] = std::norm(total);
  }
  return y;
}

namespace {
constexpr std::uint32_t kSensingVersion = 1;
}

void save_sensing(const SensingOperator &op, const std::filesystem::path &path) {
  detail::ByteWriter w;
  w.bytes("SENS");
  w.u32_le(kSensingVersion);
  w.u8(static_cast<std::uint8_t>(op.kind()));
  w.u32_le(static_cast<std::uint32_t>(op.rows()));
  w.u32_le(static_cast<std::uint32_t>(op.cols()));
  for (const auto &c : op.matrix().entries()) {
    w.f64_le(c.real());
    w.f64_le(c.imag());
  }
  w.write_file(path);
}

SensingOperator load_sensing(const std::filesystem::path &path) {
  detail::ByteReader r(detail::ByteReader::slurp(path), "sensing file " + path.string());
  if (r.bytes(4) != "SENS") {
    throw FormatError("sensing file " + path.string() + ": bad magic");
  }
  const std::uint32_t version = r.u32_le();
  if (version != kSensingVersion) {
    throw FormatError("sensing file: unsupported version " + std::to_string(version));
  }
  const std::uint8_t kind = r.u8();
  if (kind > 1) {
    throw FormatError("sensing file: unknown kind " + std::to_string(kind));
  }
  const std::size_t m = r.u32_le();
  const std::size_t n = r.u32_le();
  if (r.remaining() != m * n * 16) {
    throw FormatError("sensing file: payload size does not match " + std::to_string(m) + "x" +
                      std::to_string(n));
  }
  std::vector<Complex> e(m * n);
  for (auto &c : e) {
    const double re = r.f64_le();
    const double im = r.f64_le();
    c = {re, im};
  }
  return {ComplexMatrix(m, n, std::move(e)), static_cast<SensingKind>(kind)};
}

} // namespace phasekit
