#include "phasekit/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <zlib.h>

#include "byteio.hpp"

namespace phasekit {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

// gzread passes uncompressed files through unchanged.
std::vector<unsigned char> read_maybe_gzip(const std::filesystem::path &path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) {
    throw IdxError(IdxError::Kind::Unreadable, "cannot open " + path.string());
  }
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) {
    out.insert(out.end(), buf, buf + got);
  }
  const bool failed = got < 0;
  gzclose(f);
  if (failed) {
    throw IdxError(IdxError::Kind::Unreadable, "cannot decompress " + path.string());
  }
  return out;
}

std::uint32_t be32(const std::vector<unsigned char> &b, std::size_t at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
         (static_cast<std::uint32_t>(b[at + 2]) << 8) | static_cast<std::uint32_t>(b[at + 3]);
}

} // namespace

ImageDataset load_mnist(const std::filesystem::path &images_path,
                        const std::optional<std::filesystem::path> &labels_path) {
  const auto bytes = read_maybe_gzip(images_path);
  const std::string name = images_path.string();
  if (bytes.size() < 16) {
    throw IdxError(IdxError::Kind::Truncated, name + ": header truncated");
  }
  if (be32(bytes, 0) != kIdxImages) {
    throw IdxError(IdxError::Kind::BadMagic, name + ": not an IDX image file");
  }
  const std::size_t count = be32(bytes, 4);
  const std::size_t rows = be32(bytes, 8);
  const std::size_t cols = be32(bytes, 12);
  const std::size_t pixels = rows * cols;
  if (pixels == 0 || count > (bytes.size() - 16) / pixels) {
    throw IdxError(IdxError::Kind::Truncated, name + ": expected " + std::to_string(count) +
                                                  " images of " + std::to_string(rows) + "x" +
                                                  std::to_string(cols));
  }

  ImageDataset data;
  data.width = cols;
  data.height = rows;
  data.source = DatasetSource::Mnist;
  data.images.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char *src = bytes.data() + 16 + i * pixels;
    Signal img(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
      img[p] = static_cast<double>(src[p]) / 255.0;
    }
    data.images[i] = std::move(img);
  }

  if (labels_path) {
    const auto lb = read_maybe_gzip(*labels_path);
    const std::string lname = labels_path->string();
    if (lb.size() < 8) {
      throw IdxError(IdxError::Kind::Truncated, lname + ": header truncated");
    }
    if (be32(lb, 0) != kIdxLabels) {
      throw IdxError(IdxError::Kind::BadMagic, lname + ": not an IDX label file");
    }
    const std::size_t label_count = be32(lb, 4);
    if (label_count != count) {
      throw IdxError(IdxError::Kind::CountMismatch,
                     lname + ": " + std::to_string(label_count) + " labels for " +
                         std::to_string(count) + " images");
    }
    if (lb.size() - 8 < label_count) {
      throw IdxError(IdxError::Kind::Truncated, lname + ": label data truncated");
    }
    std::vector<int> labels(label_count);
    for (std::size_t i = 0; i < label_count; ++i) {
      labels[i] = lb[8 + i];
    }
    data.labels = std::move(labels);
  }
  return data;
}

void save_idx(const ImageDataset &data, const std::filesystem::path &images_path,
              const std::optional<std::filesystem::path> &labels_path) {
  detail::ByteWriter w;
  w.u32_be(kIdxImages);
  w.u32_be(static_cast<std::uint32_t>(data.size()));
  w.u32_be(static_cast<std::uint32_t>(data.height));
  w.u32_be(static_cast<std::uint32_t>(data.width));
  for (const auto &img : data.images) {
    if (img.size() != data.width * data.height) {
      throw DimensionError("save_idx: image size does not match dataset shape");
    }
    for (double v : img) {
      w.u8(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    }
  }
  w.write_file(images_path);

  if (labels_path) {
    if (!data.labels || data.labels->size() != data.size()) {
      throw DimensionError("save_idx: label count does not match image count");
    }
    detail::ByteWriter lw;
    lw.u32_be(kIdxLabels);
    lw.u32_be(static_cast<std::uint32_t>(data.size()));
    for (int l : *data.labels) {
      lw.u8(static_cast<std::uint8_t>(l));
    }
    lw.write_file(*labels_path);
  }
}

std::vector<Ellipse> modified_shepp_logan() {
  // center x, center y, a, b, rotation (deg), intensity
  return {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},       {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},     {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},   {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
}

PhantomSpec PhantomSpec::without_jitter() {
  PhantomSpec spec;
  spec.center_jitter = 0.0;
  spec.axis_scale_min = 1.0;
  spec.axis_scale_max = 1.0;
  spec.rotation_jitter_deg = 0.0;
  return spec;
}

Signal rasterize_phantom(const std::vector<Ellipse> &ellipses, std::size_t width,
                         std::size_t height) {
  Signal img(width * height, 0.0);
  for (const auto &e : ellipses) {
    const double theta = e.rotation_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (std::size_t r = 0; r < height; ++r) {
      const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(height);
      for (std::size_t c = 0; c < width; ++c) {
        const double x = (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(width) - 1.0;
        const double dx = x - e.center_x;
        const double dy = y - e.center_y;
        const double u = (dx * ct + dy * st) / e.semi_axis_a;
        const double v = (-dx * st + dy * ct) / e.semi_axis_b;
        if (u * u + v * v <= 1.0) {
          img[r * width + c] += e.intensity;
        }
      }
    }
  }
  for (auto &v : img) {
    v = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

ImageDataset synthesize_shepp_logan(const PhantomSpec &spec, std::size_t count) {
  ImageDataset data;
  data.width = spec.width;
  data.height = spec.height;
  data.source = DatasetSource::SheppLogan;
  data.images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SeededRng rng(derive_seed(spec.seed, i));
    const auto jitter = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    std::vector<Ellipse> ellipses = spec.base;
    for (auto &e : ellipses) {
      e.center_x += jitter(-spec.center_jitter, spec.center_jitter);
      e.center_y += jitter(-spec.center_jitter, spec.center_jitter);
      e.semi_axis_a *= jitter(spec.axis_scale_min, spec.axis_scale_max);
      e.semi_axis_b *= jitter(spec.axis_scale_min, spec.axis_scale_max);
      e.rotation_deg += jitter(-spec.rotation_jitter_deg, spec.rotation_jitter_deg);
    }
    data.images.push_back(rasterize_phantom(ellipses, spec.width, spec.height));
  }
  return data;
}

void write_pgm(std::span<const double> image, std::size_t width, std::size_t height,
               const std::filesystem::path &path) {
  if (image.size() != width * height) {
    throw DimensionError("write_pgm: image length does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  detail::ByteWriter w;
  w.bytes("P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n");
  for (double v : image) {
    w.u8(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
  }
  w.write_file(path);
}

std::vector<std::size_t> seeded_shuffle(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  SeededRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

} // namespace phasekit
