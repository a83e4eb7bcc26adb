#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "phasekit/errors.hpp"
#include "phasekit/rng.hpp"
#include "phasekit/sensing.hpp"

namespace phasekit {

enum class DatasetSource { Mnist, SheppLogan };

struct ImageDataset {
  std::vector<Signal> images; ///< row-major, pixels in [0, 1]
  std::size_t width = 28;
  std::size_t height = 28;
  DatasetSource source = DatasetSource::Mnist;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return images.size(); }
};

/// IDX parse failure. The kind tells the three failure modes apart.
class IdxError : public FormatError {
public:
  enum class Kind { BadMagic, Truncated, CountMismatch, Unreadable };

  IdxError(Kind kind, const std::string &what) : FormatError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Reads IDX image (magic 0x00000803) and optional label (0x00000801) files,
/// plain or gzip-compressed. Pixels are scaled by 1/255.
ImageDataset load_mnist(const std::filesystem::path &images_path,
                        const std::optional<std::filesystem::path> &labels_path = std::nullopt);

/// Writes the images as an uncompressed IDX u8 file, pixel = round(255 v)
/// after clamping, and labels alongside when present.
void save_idx(const ImageDataset &data, const std::filesystem::path &images_path,
              const std::optional<std::filesystem::path> &labels_path = std::nullopt);

struct Ellipse {
  double center_x = 0.0;
  double center_y = 0.0;
  double semi_axis_a = 0.0; ///< along the rotated x axis
  double semi_axis_b = 0.0;
  double rotation_deg = 0.0;
  double intensity = 0.0; ///< added inside the ellipse
};

/// Ten-ellipse modified Shepp-Logan phantom on [-1, 1]^2.
std::vector<Ellipse> modified_shepp_logan();

struct PhantomSpec {
  std::vector<Ellipse> base = modified_shepp_logan();
  double center_jitter = 0.1;    ///< uniform +- on each coordinate
  double axis_scale_min = 0.8;   ///< each semi-axis scaled by U[min, max]
  double axis_scale_max = 1.2;
  double rotation_jitter_deg = 10.0;
  std::size_t width = 28;
  std::size_t height = 28;
  std::uint64_t seed = 0;

  static PhantomSpec without_jitter();
};

/// Sums ellipse intensities at each pixel center (x to the right, y up,
/// both in [-1, 1]) and clamps to [0, 1].
Signal rasterize_phantom(const std::vector<Ellipse> &ellipses, std::size_t width,
                         std::size_t height);

/// count randomized phantoms; image i draws from derive_seed(spec.seed, i),
/// so images can be produced independently and in any order.
ImageDataset synthesize_shepp_logan(const PhantomSpec &spec, std::size_t count);

/// Binary 8-bit PGM (P5), pixel = round(255 * clamp(v, 0, 1)).
void write_pgm(std::span<const double> image, std::size_t width, std::size_t height,
               const std::filesystem::path &path);

/// Deterministic Fisher-Yates permutation of [0, n).
std::vector<std::size_t> seeded_shuffle(std::size_t n, std::uint64_t seed);

} // namespace phasekit
