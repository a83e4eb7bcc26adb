#include "phasekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

void check_same(std::span<const double> a, std::span<const double> b, const char *what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
}

struct Window {
  std::size_t size;
  std::vector<double> taps; // normalized 1-D Gaussian
};

Window gaussian_window(std::size_t width, std::size_t height) {
  std::size_t size = std::min<std::size_t>({11, width, height});
  if (size % 2 == 0) {
    --size;
  }
  const double sigma = 1.5 * static_cast<double>(size) / 11.0;
  Window w{size, std::vector<double>(size)};
  const double mid = static_cast<double>(size - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - mid;
    w.taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w.taps[i];
  }
  for (auto &t : w.taps) {
    t /= total;
  }
  return w;
}

// Valid-mode separable filtering: rows first, then columns.
std::vector<double> filter_valid(const std::vector<double> &img, std::size_t width,
                                 std::size_t height, const Window &w) {
  const std::size_t ow = width - w.size + 1;
  const std::size_t oh = height - w.size + 1;
  std::vector<double> tmp(height * ow);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size; ++k) {
        acc += w.taps[k] * img[r * width + c + k];
      }
      tmp[r * ow + c] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size; ++k) {
        acc += w.taps[k] * tmp[(r + k) * ow + c];
      }
      out[r * ow + c] = acc;
    }
  }
  return out;
}

} // namespace

Signal sign_align(std::span<const double> estimate, std::span<const double> truth) {
  check_same(estimate, truth, "sign_align");
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    plus += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    minus += (estimate[i] + truth[i]) * (estimate[i] + truth[i]);
  }
  Signal out(estimate.begin(), estimate.end());
  if (minus < plus) {
    for (auto &v : out) {
      v = -v;
    }
  }
  return out;
}

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  check_same(a, b, "psnr");
  if (a.empty()) {
    throw DimensionError("psnr: empty images");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(std::span<const double> a, std::span<const double> b, std::size_t width,
            std::size_t height) {
  check_same(a, b, "ssim");
  if (width * height != a.size() || width == 0 || height == 0) {
    throw DimensionError("ssim: " + std::to_string(width) + "x" + std::to_string(height) +
                         " does not match image length " + std::to_string(a.size()));
  }
  const Window w = gaussian_window(width, height);
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);

  const std::vector<double> x(a.begin(), a.end());
  const std::vector<double> y(b.begin(), b.end());
  std::vector<double> xx(x.size());
  std::vector<double> yy(x.size());
  std::vector<double> xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, width, height, w);
  const auto mu_y = filter_valid(y, width, height, w);
  const auto e_xx = filter_valid(xx, width, height, w);
  const auto e_yy = filter_valid(yy, width, height, w);
  const auto e_xy = filter_valid(xy, width, height, w);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  check_same(a, b, "relative_error");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

QualityScore score(std::span<const double> estimate, std::span<const double> truth,
                   std::size_t width, std::size_t height) {
  const Signal aligned = sign_align(estimate, truth);
  return {ssim(aligned, truth, width, height), psnr(aligned, truth),
          relative_error(aligned, truth)};
}

std::string format_psnr(double value) {
  if (std::isinf(value) && value > 0.0) {
    return "inf";
  }
  return fmt::format("{:.6f}", value);
}

} // namespace phasekit
