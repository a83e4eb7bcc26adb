#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "phasekit/sensing.hpp"

namespace phasekit {

/// s * estimate with s in {+1, -1} minimizing ||s * estimate - truth||;
/// ties (zero estimate) keep s = +1.
Signal sign_align(std::span<const double> estimate, std::span<const double> truth);

/// 10 log10(peak^2 / MSE); +infinity when the images are identical.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0);

/// Mean SSIM over all valid 11 x 11 Gaussian windows (sigma 1.5, K1 = 0.01,
/// K2 = 0.03, dynamic range 1). Images smaller than the window use the
/// largest odd window that fits, with sigma scaled in proportion.
double ssim(std::span<const double> a, std::span<const double> b, std::size_t width,
            std::size_t height);

/// ||a - b|| / ||b||
double relative_error(std::span<const double> a, std::span<const double> b);

struct QualityScore {
  double ssim = 0.0;
  double psnr = 0.0;
  double aligned_rel_error = 0.0;
};

/// Sign-aligns estimate to truth, then scores it.
QualityScore score(std::span<const double> estimate, std::span<const double> truth,
                   std::size_t width, std::size_t height);

/// CSV rendering of a PSNR value ("inf" for the identical-image sentinel).
std::string format_psnr(double value);

} // namespace phasekit
