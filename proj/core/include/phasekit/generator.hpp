#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "phasekit/numerics.hpp"

namespace phasekit {

enum class Activation : std::uint8_t { Linear = 0, ReLU = 1, Sigmoid = 2, Tanh = 3 };

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights; ///< out_dim x in_dim, row-major
  std::vector<double> bias;    ///< out_dim
  Activation activation = Activation::Linear;

  bool operator==(const DenseLayer &) const = default;
};

using LatentVector = RealVector;

/// Feed-forward stack of dense layers G: R^p -> R^n. Immutable once built.
class GeneratorNet {
public:
  /// Validates shapes, the dimension chain between consecutive layers and
  /// finiteness of every parameter.
  explicit GeneratorNet(std::vector<DenseLayer> layers);

  std::size_t latent_dim() const { return layers_.front().in_dim; }
  std::size_t output_dim() const { return layers_.back().out_dim; }
  const std::vector<DenseLayer> &layers() const { return layers_; }

  bool operator==(const GeneratorNet &) const = default;

private:
  std::vector<DenseLayer> layers_;
};

RealVector generator_forward(const GeneratorNet &g, std::span<const double> z);

/// J_G(z)^T cotangent by reverse accumulation. ReLU uses derivative 0 at 0.
RealVector generator_vjp(const GeneratorNet &g, std::span<const double> z,
                         std::span<const double> cotangent);

/// Forward pass that keeps every layer output, reused by the backward pass.
class GeneratorTape {
public:
  GeneratorTape(const GeneratorNet &g, std::span<const double> z);

  std::span<const double> output() const { return activations_.back(); }
  RealVector vjp(std::span<const double> cotangent) const;

private:
  const GeneratorNet *net_;
  std::vector<RealVector> activations_; ///< activations_[0] = z
};

/// Weight file: "DGPR", u32 version = 1, u32 layer count, then per layer
/// u32 in_dim, u32 out_dim, u8 activation, float32 weights (out x in,
/// row-major), float32 bias; all little-endian, no trailing bytes.
/// Parameters are stored as float32, so saving rounds them.
void save_generator(const GeneratorNet &g, const std::filesystem::path &path);
GeneratorNet load_generator(const std::filesystem::path &path);

/// Built-in generator whose range is a smooth family of images:
/// layer 1 (Linear) maps z in R^k onto the k lowest-frequency 2-D cosine
/// images scaled by `contrast`; layer 2 applies a pixelwise Sigmoid
/// (identity weights). Parameters are float32-representable.
GeneratorNet synthetic_generator(std::size_t width = 28, std::size_t height = 28,
                                 std::size_t k = 8, double contrast = 1.5);

} // namespace phasekit
