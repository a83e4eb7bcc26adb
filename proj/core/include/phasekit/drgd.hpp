#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "phasekit/classical.hpp"
#include "phasekit/generator.hpp"
#include "phasekit/sensing.hpp"

namespace phasekit {

/// Anisotropic total variation of a width x height image stored row-major:
/// sum of |horizontal| plus |vertical| neighbour differences.
double tv_norm(std::span<const double> x, std::size_t width, std::size_t height);

/// Subgradient of tv_norm: D^T sign(D x) with sign(0) = 0.
RealVector tv_subgradient(std::span<const double> x, std::size_t width, std::size_t height);

enum class LatentOptimizer { PlainSubgradient, Adam };

struct DrgdConfig {
  std::size_t i_max = 200;
  double step_size = 0.1;  ///< eta
  double reg_weight = 0.1; ///< lambda
  std::uint64_t seed = 0;  ///< drives z0 ~ N(0, I)
  LatentOptimizer optimizer = LatentOptimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Restarts with a halved step after a non-finite objective.
  std::size_t max_step_halvings = 10;

  void validate() const;
};

struct DrgdResult {
  LatentVector latent;
  SolverReport report; ///< reconstruction = G(latent)
  std::size_t step_halvings = 0;
  double final_step_size = 0.0;
};

/// ||y - |A G(z)|^2||^2 + lambda ||G(z)||_TV
double drgd_objective(const SensingOperator &a, std::span<const double> y, const GeneratorNet &g,
                      std::span<const double> z, double reg_weight, std::size_t width,
                      std::size_t height);

/// (Sub)gradient of drgd_objective with respect to z.
RealVector drgd_gradient(const SensingOperator &a, std::span<const double> y,
                         const GeneratorNet &g, std::span<const double> z, double reg_weight,
                         std::size_t width, std::size_t height);

/// Deep regularized gradient descent over the latent space of g, started
/// from z0 ~ N(0, I) drawn from cfg.seed.
DrgdResult drgd(const SensingOperator &a, std::span<const double> y, const GeneratorNet &g,
                const DrgdConfig &cfg, std::size_t width, std::size_t height);

struct DeepInitReport {
  DrgdResult init;
  SolverReport kaczmarz;

  const Signal &reconstruction() const { return kaczmarz.reconstruction; }
  double wall_time() const { return init.report.wall_time + kaczmarz.wall_time; }
};

/// DRGD followed by randomized Kaczmarz started at G(z*). The final estimate
/// is free to leave the range of g.
DeepInitReport deepinit(const SensingOperator &a, std::span<const double> y,
                        const GeneratorNet &g, const DrgdConfig &cfg, std::size_t k_max,
                        SeededRng &rng, std::size_t width, std::size_t height,
                        const KaczmarzOptions &options = {});

} // namespace phasekit
