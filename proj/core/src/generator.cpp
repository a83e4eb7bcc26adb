#include "phasekit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "byteio.hpp"
#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

constexpr std::uint32_t kWeightFormatVersion = 1;

double activate(Activation a, double v) {
  switch (a) {
  case Activation::Linear:
    return v;
  case Activation::ReLU:
    return v > 0.0 ? v : 0.0;
  case Activation::Sigmoid:
    return 1.0 / (1.0 + std::exp(-v));
  case Activation::Tanh:
    return std::tanh(v);
  }
  return v;
}

// Derivative expressed through the activation output.
double activation_slope(Activation a, double out) {
  switch (a) {
  case Activation::Linear:
    return 1.0;
  case Activation::ReLU:
    return out > 0.0 ? 1.0 : 0.0;
  case Activation::Sigmoid:
    return out * (1.0 - out);
  case Activation::Tanh:
    return 1.0 - out * out;
  }
  return 1.0;
}

} // namespace

GeneratorNet::GeneratorNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw std::invalid_argument("GeneratorNet: needs at least one layer");
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto &l = layers_[k];
    if (l.in_dim == 0 || l.out_dim == 0) {
      throw DimensionError("GeneratorNet: layer " + std::to_string(k) + " has a zero dimension");
    }
    if (l.weights.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim) {
      throw DimensionError("GeneratorNet: layer " + std::to_string(k) +
                           " parameter sizes do not match its dimensions");
    }
    if (k > 0 && layers_[k - 1].out_dim != l.in_dim) {
      throw DimensionError("GeneratorNet: layer " + std::to_string(k) + " expects " +
                           std::to_string(l.in_dim) + " inputs but previous layer emits " +
                           std::to_string(layers_[k - 1].out_dim));
    }
    if (static_cast<std::uint8_t>(l.activation) > 3) {
      throw std::invalid_argument("GeneratorNet: unknown activation");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
      throw std::invalid_argument("GeneratorNet: non-finite parameter in layer " +
                                  std::to_string(k));
    }
  }
}

GeneratorTape::GeneratorTape(const GeneratorNet &g, std::span<const double> z) : net_(&g) {
  if (z.size() != g.latent_dim()) {
    throw DimensionError("generator: latent length " + std::to_string(z.size()) + " != " +
                         std::to_string(g.latent_dim()));
  }
  activations_.reserve(g.layers().size() + 1);
  activations_.emplace_back(z.begin(), z.end());
  for (const auto &layer : g.layers()) {
    const RealVector &in = activations_.back();
    RealVector out(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double *w = layer.weights.data() + o * layer.in_dim;
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        acc += w[i] * in[i];
      }
      out[o] = activate(layer.activation, acc);
    }
    activations_.push_back(std::move(out));
  }
}

RealVector GeneratorTape::vjp(std::span<const double> cotangent) const {
  const auto &layers = net_->layers();
  if (cotangent.size() != net_->output_dim()) {
    throw DimensionError("generator_vjp: cotangent length " + std::to_string(cotangent.size()) +
                         " != " + std::to_string(net_->output_dim()));
  }
  RealVector grad(cotangent.begin(), cotangent.end());
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto &layer = layers[k];
    const RealVector &out = activations_[k + 1];
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      grad[o] *= activation_slope(layer.activation, out[o]);
    }
    RealVector prev(layer.in_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double go = grad[o];
      if (go == 0.0) {
        continue;
      }
      const double *w = layer.weights.data() + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        prev[i] += w[i] * go;
      }
    }
    grad = std::move(prev);
  }
  return grad;
}

RealVector generator_forward(const GeneratorNet &g, std::span<const double> z) {
  const GeneratorTape tape(g, z);
  const auto out = tape.output();
  return {out.begin(), out.end()};
}

RealVector generator_vjp(const GeneratorNet &g, std::span<const double> z,
                         std::span<const double> cotangent) {
  return GeneratorTape(g, z).vjp(cotangent);
}

void save_generator(const GeneratorNet &g, const std::filesystem::path &path) {
  detail::ByteWriter w;
  w.bytes("DGPR");
  w.u32_le(kWeightFormatVersion);
  w.u32_le(static_cast<std::uint32_t>(g.layers().size()));
  for (const auto &l : g.layers()) {
    w.u32_le(static_cast<std::uint32_t>(l.in_dim));
    w.u32_le(static_cast<std::uint32_t>(l.out_dim));
    w.u8(static_cast<std::uint8_t>(l.activation));
    for (double v : l.weights) {
      w.f32_le(static_cast<float>(v));
    }
    for (double v : l.bias) {
      w.f32_le(static_cast<float>(v));
    }
  }
  w.write_file(path);
}

GeneratorNet load_generator(const std::filesystem::path &path) {
  const std::string what = "weight file " + path.string();
  detail::ByteReader r(detail::ByteReader::slurp(path), what);
  if (r.bytes(4) != "DGPR") {
    throw FormatError(what + ": bad magic");
  }
  const std::uint32_t version = r.u32_le();
  if (version != kWeightFormatVersion) {
    throw FormatError(what + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32_le();
  if (count == 0) {
    throw FormatError(what + ": no layers");
  }
  std::vector<DenseLayer> layers(count);
  for (auto &l : layers) {
    l.in_dim = r.u32_le();
    l.out_dim = r.u32_le();
    const std::uint8_t act = r.u8();
    if (act > 3) {
      throw FormatError(what + ": unknown activation code " + std::to_string(act));
    }
    l.activation = static_cast<Activation>(act);
    if (r.remaining() / 4 < l.in_dim * l.out_dim + l.out_dim) {
      throw FormatError(what + ": truncated input");
    }
    l.weights.resize(l.in_dim * l.out_dim);
    for (auto &v : l.weights) {
      v = r.f32_le();
    }
    l.bias.resize(l.out_dim);
    for (auto &v : l.bias) {
      v = r.f32_le();
    }
  }
  if (!r.at_end()) {
    throw FormatError(what + ": " + std::to_string(r.remaining()) + " trailing bytes");
  }
  try {
    return GeneratorNet(std::move(layers));
  } catch (const std::invalid_argument &e) {
    throw FormatError(what + ": " + e.what());
  }
}

GeneratorNet synthetic_generator(std::size_t width, std::size_t height, std::size_t k,
                                 double contrast) {
  if (width == 0 || height == 0 || k == 0 || k > width * height) {
    throw std::invalid_argument("synthetic_generator: invalid dimensions");
  }
  const std::size_t n = width * height;

  // Frequencies ordered by total frequency, then by vertical frequency.
  std::vector<std::pair<std::size_t, std::size_t>> freqs;
  for (std::size_t s = 0; freqs.size() < k; ++s) {
    for (std::size_t fy = 0; fy <= s && freqs.size() < k; ++fy) {
      const std::size_t fx = s - fy;
      if (fy < height && fx < width) {
        freqs.emplace_back(fy, fx);
      }
    }
  }

  DenseLayer basis;
  basis.in_dim = k;
  basis.out_dim = n;
  basis.weights.assign(n * k, 0.0);
  basis.bias.assign(n, 0.0);
  basis.activation = Activation::Linear;
  using std::numbers::pi;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t b = 0; b < k; ++b) {
        const auto [fy, fx] = freqs[b];
        const double v = std::cos(pi * (2.0 * r + 1.0) * fy / (2.0 * height)) *
                         std::cos(pi * (2.0 * c + 1.0) * fx / (2.0 * width));
        basis.weights[(r * width + c) * k + b] = static_cast<float>(contrast * v);
      }
    }
  }

  DenseLayer squash;
  squash.in_dim = n;
  squash.out_dim = n;
  squash.weights.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    squash.weights[i * n + i] = 1.0;
  }
  squash.bias.assign(n, 0.0);
  squash.activation = Activation::Sigmoid;

  return GeneratorNet({std::move(basis), std::move(squash)});
}

} // namespace phasekit
