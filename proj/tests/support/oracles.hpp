#pragma once

// Straightforward reference implementations used only by the tests. They
// favour obviousness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

// Reference xoshiro256** and splitmix64, transcribed from the public-domain
// C sources by Blackman and Vigna.
struct Xoshiro {
  std::uint64_t s[4];

  static std::uint64_t splitmix(std::uint64_t &x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  explicit Xoshiro(std::uint64_t seed) {
    for (auto &w : s) {
      w = splitmix(seed);
    }
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

// Singular values by one-sided Jacobi rotations on the columns of a
// row-major rows x cols complex matrix.
inline std::vector<double> singular_values(std::vector<cd> a, std::size_t rows, std::size_t cols) {
  auto at = [&](std::size_t r, std::size_t c) -> cd & { return a[r * cols + c]; };
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0;
        double beta = 0.0;
        cd gamma{};
        for (std::size_t r = 0; r < rows; ++r) {
          alpha += std::norm(at(r, p));
          beta += std::norm(at(r, q));
          gamma += std::conj(at(r, p)) * at(r, q);
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= 1e-15 * std::sqrt(alpha * beta)) {
          continue;
        }
        off = std::max(off, g / std::sqrt(alpha * beta));
        const cd phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const cd xp = at(r, p);
          const cd xq = at(r, q) * std::conj(phase);
          at(r, p) = c * xp - s * xq;
          at(r, q) = (s * xp + c * xq) * phase;
        }
      }
    }
    if (off < 1e-14) {
      break;
    }
  }
  std::vector<double> sv(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      acc += std::norm(at(r, c));
    }
    sv[c] = std::sqrt(acc);
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

inline std::size_t rank_from_singular_values(const std::vector<double> &sv, double rel_tol) {
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > rel_tol * sv.front(); }));
}

// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double> &)> &f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double keep = x[j];
    x[j] = keep + h;
    const double up = f(x);
    x[j] = keep - h;
    const double down = f(x);
    x[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Mean SSIM with a direct 2-D window sum at every valid position.
inline double ssim(const std::vector<double> &x, const std::vector<double> &y, std::size_t w,
                   std::size_t h, std::size_t win, double sigma) {
  std::vector<double> kernel(win * win);
  double total = 0.0;
  const double mid = (static_cast<double>(win) - 1.0) / 2.0;
  for (std::size_t i = 0; i < win; ++i) {
    for (std::size_t j = 0; j < win; ++j) {
      const double di = static_cast<double>(i) - mid;
      const double dj = static_cast<double>(j) - mid;
      kernel[i * win + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      total += kernel[i * win + j];
    }
  }
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + win <= h; ++r) {
    for (std::size_t c = 0; c + win <= w; ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t i = 0; i < win; ++i) {
        for (std::size_t j = 0; j < win; ++j) {
          const double k = kernel[i * win + j] / total;
          const double a = x[(r + i) * w + c + j];
          const double b = y[(r + i) * w + c + j];
          mx += k * a;
          my += k * b;
          sxx += k * a * a;
          syy += k * b * b;
          sxy += k * a * b;
        }
      }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cov = sxy - mx * my;
      acc += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

// Fresnel propagation matrix evaluated entry by entry.
inline std::vector<cd> fresnel(double lambda, double d, double pitch, std::size_t side) {
  const std::size_t n = side * side;
  std::vector<cd> out(n * n);
  const double pi = std::numbers::pi;
  const cd pre = pitch * pitch / (cd(0.0, 1.0) * lambda * d) * std::exp(cd(0.0, 2.0 * pi * d / lambda));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = (static_cast<double>(k % side) - static_cast<double>(j % side)) * pitch;
      const double dy = (static_cast<double>(k / side) - static_cast<double>(j / side)) * pitch;
      out[k * n + j] = pre * std::exp(cd(0.0, pi * (dx * dx + dy * dy) / (lambda * d)));
    }
  }
  return out;
}

} // namespace oracle
