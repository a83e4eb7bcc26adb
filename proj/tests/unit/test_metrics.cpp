#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "phasekit/metrics.hpp"
#include "phasekit/rng.hpp"
#include "../support/oracles.hpp"

using namespace phasekit;

namespace {

std::vector<double> random_image(SeededRng &rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto &x : v) x = rng.uniform();
  return v;
}

double loop_psnr(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return 10.0 * std::log10(1.0 / (s / static_cast<double>(a.size())));
}

} // namespace

TEST_CASE("PSNR of a uniform 0.1 offset is 20 dB") {
  SeededRng rng(1);
  const auto b = random_image(rng, 784);
  std::vector<double> a(b);
  for (auto &v : a) v += 0.1;
  CHECK(std::abs(psnr(a, b) - 20.0) < 1e-9);
  const std::vector<double> zeros(64, 0.0);
  const std::vector<double> tenths(64, 0.1);
  CHECK(std::abs(psnr(tenths, zeros) - 20.0) < 1e-12);
}

TEST_CASE("PSNR matches a loop oracle and is infinite for identical images") {
  SeededRng rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_image(rng, 100);
    const auto b = random_image(rng, 100);
    CHECK(psnr(a, b) == doctest::Approx(loop_psnr(a, b)).epsilon(1e-12));
  }
  const auto a = random_image(rng, 10);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  CHECK(format_psnr(psnr(a, a)) == "inf");
  CHECK(format_psnr(20.0) == "20.000000");
}

TEST_CASE("SSIM of an image with itself is one") {
  SeededRng rng(3);
  const auto a = random_image(rng, 784);
  CHECK(ssim(a, a, 28, 28) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> flat(784, 0.4);
  CHECK(ssim(flat, flat, 28, 28) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("SSIM matches a direct windowed oracle") {
  SeededRng rng(4);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_image(rng, 784);
    auto b = a;
    for (auto &v : b) v = std::clamp(v + 0.2 * (rng.uniform() - 0.5), 0.0, 1.0);
    CHECK(ssim(a, b, 28, 28) == doctest::Approx(oracle::ssim(a, b, 28, 28, 11, 1.5)).epsilon(1e-10));
  }
  // Non-square image smaller than the default window: 9 x 7 uses a 7 x 7 window.
  const auto a = random_image(rng, 63);
  const auto b = random_image(rng, 63);
  CHECK(ssim(a, b, 9, 7) ==
        doctest::Approx(oracle::ssim(a, b, 9, 7, 7, 1.5 * 7.0 / 11.0)).epsilon(1e-10));
}

TEST_CASE("SSIM is symmetric and below one for distinct images") {
  SeededRng rng(5);
  const auto a = random_image(rng, 400);
  const auto b = random_image(rng, 400);
  CHECK(ssim(a, b, 20, 20) == doctest::Approx(ssim(b, a, 20, 20)).epsilon(1e-14));
  CHECK(ssim(a, b, 20, 20) < 0.5);
  CHECK_THROWS(ssim(a, b, 19, 20));
}

TEST_CASE("sign alignment and scores") {
  const std::vector<double> truth{0.1, 0.5, 0.9, 0.3};
  std::vector<double> flipped(truth);
  for (auto &v : flipped) v = -v;
  CHECK(sign_align(flipped, truth) == truth);
  CHECK(sign_align(truth, truth) == truth);
  const std::vector<double> zero(4, 0.0);
  CHECK(sign_align(zero, truth) == zero);
  CHECK(relative_error(flipped, truth) == doctest::Approx(2.0));
  const QualityScore s = score(flipped, truth, 2, 2);
  CHECK(s.aligned_rel_error == 0.0);
  CHECK(s.psnr == std::numeric_limits<double>::infinity());
  CHECK(s.ssim == doctest::Approx(1.0));
  CHECK_THROWS(psnr(truth, std::vector<double>(3)));
}

TEST_CASE("sign alignment picks the closer candidate") {
  SeededRng rng(7);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(10);
    std::vector<double> b(10);
    for (auto &v : a) v = rng.normal();
    for (auto &v : b) v = rng.normal();
    std::vector<double> neg(a);
    for (auto &v : neg) v = -v;
    const auto s = sign_align(a, b);
    const auto dist = [&](const std::vector<double> &u) {
      double d = 0.0;
      for (std::size_t i = 0; i < 10; ++i) d += (u[i] - b[i]) * (u[i] - b[i]);
      return d;
    };
    CHECK(dist(s) <= dist(a));
    CHECK(dist(s) <= dist(neg));
  }
}

TEST_CASE("SSIM penalizes a binary inversion") {
  SeededRng rng(8);
  std::vector<double> x(784);
  for (auto &v : x) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  std::vector<double> inv(x);
  for (auto &v : inv) v = 1.0 - v;
  const double s = ssim(x, inv, 28, 28);
  CHECK(s < 0.5);
  CHECK(s == doctest::Approx(oracle::ssim(x, inv, 28, 28, 11, 1.5)).epsilon(1e-10));
}
