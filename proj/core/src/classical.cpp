#include "phasekit/classical.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_measurements(const SensingOperator &a, std::span<const double> y) {
  if (y.size() != a.rows()) {
    throw DimensionError("measurement count " + std::to_string(y.size()) + " != operator rows " +
                         std::to_string(a.rows()));
  }
}

void check_signal(const SensingOperator &a, std::span<const double> x, const char *what) {
  if (x.size() != a.cols()) {
    throw DimensionError(std::string(what) + ": signal length " + std::to_string(x.size()) +
                         " != operator columns " + std::to_string(a.cols()));
  }
}

// Mean squared row norm per column; 1 for unit-variance Gaussian rows.
double row_energy(const SensingOperator &a) {
  const auto norms = a.row_norms_sq();
  const double total = std::accumulate(norms.begin(), norms.end(), 0.0);
  return total / (static_cast<double>(a.rows()) * static_cast<double>(a.cols()));
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

void ClassicalConfig::validate() const {
  if (k_max < 1) {
    throw std::invalid_argument("ClassicalConfig: k_max must be >= 1");
  }
  if (!(twf_lb < twf_ub)) {
    throw std::invalid_argument("ClassicalConfig: twf_lb must be < twf_ub");
  }
  if (!(step_size > 0.0)) {
    throw std::invalid_argument("ClassicalConfig: step_size must be > 0");
  }
}

std::size_t log_interval(std::size_t k_max) { return std::max<std::size_t>(1, k_max / 500); }

double intensity_loss(const SensingOperator &a, std::span<const double> y,
                      std::span<const double> x) {
  check_measurements(a, y);
  const ComplexVector u = matvec(a.matrix(), x);
  double loss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::norm(u[i]) - y[i];
    loss += r * r;
  }
  return loss;
}

RealVector intensity_loss_gradient(const SensingOperator &a, std::span<const double> y,
                                   std::span<const double> x,
                                   std::span<const std::uint8_t> include) {
  check_measurements(a, y);
  check_signal(a, x, "intensity_loss_gradient");
  if (!include.empty() && include.size() != a.rows()) {
    throw DimensionError("intensity_loss_gradient: mask length != measurement count");
  }
  ComplexVector w = matvec(a.matrix(), x);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool keep = include.empty() || include[i] != 0;
    w[i] = keep ? 4.0 * (std::norm(w[i]) - y[i]) * w[i] : Complex{};
  }
  // Re(conj(u_i) a_ij) summed over i is Re(A^H w)_j.
  const ComplexVector back = adjoint_matvec(a.matrix(), w);
  RealVector g(a.cols());
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] = back[j].real();
  }
  return g;
}

Signal spectral_init(const SensingOperator &a, std::span<const double> y) {
  check_measurements(a, y);
  const double y_mean = mean(y);
  if (!(y_mean > 0.0)) {
    throw std::invalid_argument("spectral_init: measurements are all zero");
  }
  const ComplexMatrix &m = a.matrix();
  const double inv_m = 1.0 / static_cast<double>(a.rows());
  // (1/m) A^H diag(y) A applied without forming the n x n matrix.
  const LinearMap weighted_covariance = [&](std::span<const Complex> v) {
    ComplexVector av = matvec(m, v);
    for (std::size_t i = 0; i < av.size(); ++i) {
      av[i] *= y[i] * inv_m;
    }
    return adjoint_matvec(m, av);
  };
  const EigenPair top = power_iteration(weighted_covariance, a.cols(), 200, 1e-8);
  const double scale = std::sqrt(y_mean / row_energy(a));
  Signal x = real_part_phase_aligned(top.vector);
  for (auto &v : x) {
    v *= scale;
  }
  return x;
}

Signal initial_estimate(const SensingOperator &a, std::span<const double> y,
                        const ClassicalConfig &cfg) {
  switch (cfg.init) {
  case InitKind::Spectral:
    return spectral_init(a, y);
  case InitKind::Provided:
    check_signal(a, cfg.provided_init, "initial_estimate");
    return cfg.provided_init;
  case InitKind::RandomUnit: {
    SeededRng rng(derive_seed(cfg.seed, 0x1417));
    Signal x(a.cols());
    for (auto &v : x) {
      v = rng.normal();
    }
    const double nx = norm(x);
    for (auto &v : x) {
      v /= nx;
    }
    return x;
  }
  }
  throw std::logic_error("initial_estimate: unknown init kind");
}

namespace {

struct Truncation {
  double lb;
  double ub;
};

SolverReport gradient_flow(const SensingOperator &a, std::span<const double> y,
                           const ClassicalConfig &cfg, const Truncation *truncation) {
  cfg.validate();
  check_measurements(a, y);
  const auto start = Clock::now();

  Signal x = initial_estimate(a, y, cfg);
  const double x0_norm_sq = std::pow(norm(x), 2);
  if (!(x0_norm_sq > 0.0)) {
    throw std::invalid_argument("wirtinger_flow: initial estimate is zero");
  }
  const double energy = row_energy(a);
  const double step_scale =
      1.0 / (x0_norm_sq * energy * energy * 4.0 * static_cast<double>(a.rows()));
  const double sqrt_n = std::sqrt(static_cast<double>(a.cols()));
  const auto row_norms = a.row_norms_sq();
  const std::size_t every = log_interval(cfg.k_max);

  SolverReport report;
  report.loss_trace.push_back(intensity_loss(a, y, x));
  std::vector<std::uint8_t> include;
  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    if (truncation != nullptr) {
      const ComplexVector u = matvec(a.matrix(), std::span<const double>(x));
      const double nx = norm(x);
      include.assign(a.rows(), 0);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double ratio = nx > 0.0 ? std::abs(u[i]) * sqrt_n / (nx * std::sqrt(row_norms[i]))
                                      : 0.0;
        include[i] = (ratio >= truncation->lb && ratio <= truncation->ub) ? 1 : 0;
      }
    }
    const RealVector g = intensity_loss_gradient(a, y, x, include);
    const double mu =
        std::min(1.0 - std::exp(-static_cast<double>(k) / cfg.ramp_k0), cfg.step_size);
    const double step = mu * step_scale;
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] -= step * g[j];
    }
    report.iterations_run = k;
    if (k % every == 0 || k == cfg.k_max) {
      report.loss_trace.push_back(intensity_loss(a, y, x));
    }
  }
  report.reconstruction = std::move(x);
  report.wall_time = seconds_since(start);
  return report;
}

} // namespace

SolverReport wirtinger_flow(const SensingOperator &a, std::span<const double> y,
                            const ClassicalConfig &cfg) {
  return gradient_flow(a, y, cfg, nullptr);
}

SolverReport truncated_wirtinger_flow(const SensingOperator &a, std::span<const double> y,
                                      const ClassicalConfig &cfg) {
  const Truncation t{cfg.twf_lb, cfg.twf_ub};
  return gradient_flow(a, y, cfg, &t);
}

Signal real_part_phase_aligned(std::span<const Complex> x) {
  Complex square_sum{};
  for (const auto &c : x) {
    square_sum += c * c;
  }
  const Complex rotation = std::polar(1.0, -0.5 * std::arg(square_sum));
  Signal out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (rotation * x[i]).real();
  }
  return out;
}

namespace {

double complex_intensity_loss(const SensingOperator &a, std::span<const double> y,
                              std::span<const Complex> x) {
  const ComplexVector u = matvec(a.matrix(), x);
  double loss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::norm(u[i]) - y[i];
    loss += r * r;
  }
  return loss;
}

} // namespace

SolverReport randomized_kaczmarz(const SensingOperator &a, std::span<const double> y,
                                 std::span<const double> x0, std::size_t k_max, SeededRng &rng,
                                 const KaczmarzOptions &options) {
  check_measurements(a, y);
  check_signal(a, x0, "randomized_kaczmarz");
  const auto start = Clock::now();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const auto row_norms = a.row_norms_sq();

  std::vector<double> cumulative;
  if (options.selection == RowSelection::NormWeighted) {
    cumulative.resize(m);
    std::partial_sum(row_norms.begin(), row_norms.end(), cumulative.begin());
  }
  std::vector<double> amplitude(m);
  for (std::size_t i = 0; i < m; ++i) {
    amplitude[i] = std::sqrt(y[i]);
  }

  ComplexVector x(x0.begin(), x0.end());
  SolverReport report;
  report.loss_trace.push_back(complex_intensity_loss(a, y, x));
  const std::size_t every = log_interval(k_max);

  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t r = 0;
    if (options.selection == RowSelection::Uniform) {
      r = static_cast<std::size_t>(rng.uniform_index(m));
    } else {
      const double target = rng.uniform() * cumulative.back();
      r = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
      r = std::min(r, m - 1);
    }
    const auto row = a.matrix().row(r);
    Complex u{};
    for (std::size_t j = 0; j < n; ++j) {
      u += row[j] * x[j];
    }
    const double mag = std::abs(u);
    const Complex phase = mag > 0.0 ? u / mag : Complex(1.0, 0.0);
    const Complex delta = (phase * amplitude[r] - u) / row_norms[r];
    for (std::size_t j = 0; j < n; ++j) {
      x[j] += delta * std::conj(row[j]);
    }
    report.iterations_run = k;
    if (options.on_step) {
      options.on_step(KaczmarzStep{k, r, x});
    }
    if (k % every == 0 || k == k_max) {
      report.loss_trace.push_back(complex_intensity_loss(a, y, x));
    }
  }
  report.reconstruction = real_part_phase_aligned(x);
  report.wall_time = seconds_since(start);
  return report;
}

} // namespace phasekit
