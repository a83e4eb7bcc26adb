#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "phasekit/numerics.hpp"
#include "phasekit/rng.hpp"
#include "phasekit/sensing.hpp"

namespace phasekit {

struct SolverReport {
  Signal reconstruction;
  std::vector<double> loss_trace; ///< objective at each logged iteration
  std::size_t iterations_run = 0;
  double wall_time = 0.0; ///< seconds
};

enum class InitKind { Spectral, Provided, RandomUnit };

struct ClassicalConfig {
  std::size_t k_max = 50;
  /// Cap of the step-size ramp min(1 - exp(-k / ramp_k0), step_size).
  double step_size = 0.2;
  double ramp_k0 = 330.0;
  double twf_lb = 0.3;
  double twf_ub = 5.0;
  std::uint64_t seed = 0;
  InitKind init = InitKind::Spectral;
  Signal provided_init; ///< used when init == Provided

  void validate() const;
};

/// Interval between logged loss values for a run of k_max iterations.
std::size_t log_interval(std::size_t k_max);

/// f(x) = sum_i (|<a_i, x>|^2 - y_i)^2.
double intensity_loss(const SensingOperator &a, std::span<const double> y,
                      std::span<const double> x);

/// Gradient of intensity_loss over real x:
///   g = sum_i 4 (|u_i|^2 - y_i) Re(conj(u_i) a_i),  u_i = <a_i, x>.
/// Only measurements with include[i] set contribute when include is given.
RealVector intensity_loss_gradient(const SensingOperator &a, std::span<const double> y,
                                   std::span<const double> x,
                                   std::span<const std::uint8_t> include = {});

/// sqrt(mean(y)) times the real part of the phase-aligned dominant eigenvector
/// of (1/m) A^H diag(y) A.
Signal spectral_init(const SensingOperator &a, std::span<const double> y);

/// Starting point selected by cfg.init.
Signal initial_estimate(const SensingOperator &a, std::span<const double> y,
                        const ClassicalConfig &cfg);

/// Gradient descent on the intensity loss over real signals with the ramped
/// step mu_k / ||x0||^2 applied to the gradient scaled by 1 / (4 m).
SolverReport wirtinger_flow(const SensingOperator &a, std::span<const double> y,
                            const ClassicalConfig &cfg);

/// Wirtinger flow where summand i is dropped unless
///   lb <= |u_i| sqrt(n) / (||x|| ||a_i||) <= ub.
SolverReport truncated_wirtinger_flow(const SensingOperator &a, std::span<const double> y,
                                      const ClassicalConfig &cfg);

enum class RowSelection { Uniform, NormWeighted };

struct KaczmarzStep {
  std::size_t iteration = 0; ///< 1-based
  std::size_t row = 0;
  std::span<const Complex> iterate; ///< after the update
};

struct KaczmarzOptions {
  RowSelection selection = RowSelection::Uniform;
  /// Called after every update; intended for tests and diagnostics.
  std::function<void(const KaczmarzStep &)> on_step;
};

/// Randomized Kaczmarz for |<a_i, x>| = sqrt(y_i): each step projects the
/// complex iterate onto the hyperplane <a_r, x> = phase(<a_r, x>) sqrt(y_r)
/// with phase(0) := 1. The final iterate is rotated by the global phase that
/// maximizes the norm of its real part and that real part is returned.
SolverReport randomized_kaczmarz(const SensingOperator &a, std::span<const double> y,
                                 std::span<const double> x0, std::size_t k_max, SeededRng &rng,
                                 const KaczmarzOptions &options = {});

/// Real part of e^{-i theta} x for the theta maximizing its norm.
Signal real_part_phase_aligned(std::span<const Complex> x);

} // namespace phasekit
