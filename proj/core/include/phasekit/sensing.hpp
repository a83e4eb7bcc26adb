#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "phasekit/numerics.hpp"
#include "phasekit/rng.hpp"

namespace phasekit {

using Signal = RealVector;
using Measurements = RealVector;

enum class SensingKind : std::uint8_t { Gaussian = 0, Diffraction = 1 };

/// Measurement operator y = |A x|^2 with cached squared row norms.
///
/// The amplitude seen by measurement i is u_i = sum_j A[i, j] x_j. Rows must
/// be nonzero; an operator with an all-zero row is rejected at construction
/// because Kaczmarz steps divide by the row norm.
class SensingOperator {
public:
  SensingOperator(ComplexMatrix matrix, SensingKind kind);

  const ComplexMatrix &matrix() const { return matrix_; }
  SensingKind kind() const { return kind_; }
  std::size_t rows() const { return matrix_.rows(); }
  std::size_t cols() const { return matrix_.cols(); }
  std::span<const double> row_norms_sq() const { return row_norms_sq_; }

  /// First m rows as a new operator (m <= rows()).
  SensingOperator head(std::size_t m) const;

private:
  ComplexMatrix matrix_;
  SensingKind kind_;
  std::vector<double> row_norms_sq_;
};

/// y_i = |<a_i, x>|^2.
Measurements intensity_forward(const SensingOperator &a, std::span<const double> x);

/// Physical parameters of one free-space propagation between two identically
/// sampled square pixel grids.
struct DiffractionSpec {
  double wavelength = 0.856e-3; ///< meters
  double distance = 0.01;       ///< meters
  double pixel_pitch = 0.5e-3;  ///< meters
  std::size_t grid_side = 28;   ///< pixels per edge; n = grid_side^2

  std::size_t n() const { return grid_side * grid_side; }
};

/// Scene-to-detector distance used throughout the THz model.
inline constexpr double kSceneToDetectorDistance = 0.175;

/// Default modulator-to-scene (stand-off) distance.
inline constexpr double kDefaultStandoff = 0.01;

/// Stand-off sweep grid, 1.25 mm to 80 mm by octaves.
inline constexpr double kStandoffGrid[] = {0.00125, 0.0025, 0.005, 0.01, 0.02, 0.04, 0.08};

/// Discrete Fresnel propagation matrix:
///   D[k, j] = dx^2 / (i lambda d) * exp(i 2 pi d / lambda)
///             * exp(i pi |p_k - p_j|^2 / (lambda d))
/// with p_k the pixel-center coordinates. Throws std::invalid_argument for
/// non-positive physical parameters (d = 0 included) and for grids larger
/// than 64 x 64.
ComplexMatrix build_diffraction_matrix(const DiffractionSpec &spec);

struct MaskSet {
  std::vector<std::vector<std::uint8_t>> masks;
  double bernoulli_p = 0.5;

  std::size_t count() const { return masks.size(); }
  std::size_t length() const { return masks.empty() ? 0 : masks.front().size(); }
};

/// count binary masks of length n, entries i.i.d. Bernoulli(p), drawn mask
/// by mask from rng so that a longer set extends a shorter one with the same
/// seed.
MaskSet generate_masks(SeededRng &rng, std::size_t count, std::size_t n, double p = 0.5);

/// Effective sensing rows of the single-pixel diffraction model: row i gives
/// the detector amplitude sum_j (D_sd diag(x) D_ms a_i)_j as a linear
/// functional of the scene x.
SensingOperator effective_rows(const MaskSet &masks, const ComplexMatrix &d_ms,
                               const ComplexMatrix &d_sd);

/// Evaluates the physical chain mask -> propagate -> scene -> propagate ->
/// sum -> |.|^2 directly, one mask at a time.
Measurements physical_forward(const MaskSet &masks, const ComplexMatrix &d_ms,
                              const ComplexMatrix &d_sd, std::span<const double> x);

/// Binary fixture format: "SENS", u32 version, u8 kind, u32 m, u32 n, then
/// m*n interleaved little-endian float64 (re, im), row-major.
void save_sensing(const SensingOperator &op, const std::filesystem::path &path);
SensingOperator load_sensing(const std::filesystem::path &path);

} // namespace phasekit
