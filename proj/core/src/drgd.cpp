#include "phasekit/drgd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

void check_shape(std::span<const double> x, std::size_t width, std::size_t height,
                 const char *what) {
  if (width * height != x.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(width) + "x" +
                         std::to_string(height) + " image does not match length " +
                         std::to_string(x.size()));
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

struct Evaluation {
  double objective = 0.0;
  RealVector gradient;
};

Evaluation evaluate(const SensingOperator &a, std::span<const double> y, const GeneratorNet &g,
                    std::span<const double> z, double reg_weight, std::size_t width,
                    std::size_t height, bool want_gradient) {
  const GeneratorTape tape(g, z);
  const auto x = tape.output();
  check_shape(x, width, height, "drgd");
  if (y.size() != a.rows() || x.size() != a.cols()) {
    throw DimensionError("drgd: operator, measurements and generator output disagree");
  }

  const ComplexVector u = matvec(a.matrix(), x);
  Evaluation ev;
  ComplexVector weighted(want_gradient ? u.size() : 0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::norm(u[i]) - y[i];
    ev.objective += r * r;
    if (want_gradient) {
      weighted[i] = 4.0 * r * u[i];
    }
  }
  RealVector gx;
  if (want_gradient) {
    // Re(conj(u_i) a_ij) summed over i is Re(A^H w)_j.
    const ComplexVector back = adjoint_matvec(a.matrix(), weighted);
    gx.resize(back.size());
    for (std::size_t j = 0; j < gx.size(); ++j) {
      gx[j] = back[j].real();
    }
  }
  if (reg_weight != 0.0) {
    ev.objective += reg_weight * tv_norm(x, width, height);
    if (want_gradient) {
      const RealVector tv = tv_subgradient(x, width, height);
      for (std::size_t j = 0; j < gx.size(); ++j) {
        gx[j] += reg_weight * tv[j];
      }
    }
  }
  if (want_gradient) {
    ev.gradient = tape.vjp(gx);
  }
  return ev;
}

} // namespace

double tv_norm(std::span<const double> x, std::size_t width, std::size_t height) {
  check_shape(x, width, height, "tv_norm");
  double total = 0.0;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      total += std::abs(x[r * width + c + 1] - x[r * width + c]);
    }
  }
  for (std::size_t r = 0; r + 1 < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      total += std::abs(x[(r + 1) * width + c] - x[r * width + c]);
    }
  }
  return total;
}

RealVector tv_subgradient(std::span<const double> x, std::size_t width, std::size_t height) {
  check_shape(x, width, height, "tv_subgradient");
  RealVector g(x.size(), 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      const std::size_t i = r * width + c;
      const double s = sign(x[i + 1] - x[i]);
      g[i + 1] += s;
      g[i] -= s;
    }
  }
  for (std::size_t r = 0; r + 1 < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = r * width + c;
      const double s = sign(x[i + width] - x[i]);
      g[i + width] += s;
      g[i] -= s;
    }
  }
  return g;
}

void DrgdConfig::validate() const {
  if (!(step_size > 0.0)) {
    throw std::invalid_argument("DrgdConfig: step size must be > 0");
  }
  if (!(reg_weight >= 0.0)) {
    throw std::invalid_argument("DrgdConfig: regularization weight must be >= 0");
  }
}

double drgd_objective(const SensingOperator &a, std::span<const double> y, const GeneratorNet &g,
                      std::span<const double> z, double reg_weight, std::size_t width,
                      std::size_t height) {
  return evaluate(a, y, g, z, reg_weight, width, height, false).objective;
}

RealVector drgd_gradient(const SensingOperator &a, std::span<const double> y,
                         const GeneratorNet &g, std::span<const double> z, double reg_weight,
                         std::size_t width, std::size_t height) {
  return evaluate(a, y, g, z, reg_weight, width, height, true).gradient;
}

DrgdResult drgd(const SensingOperator &a, std::span<const double> y, const GeneratorNet &g,
                const DrgdConfig &cfg, std::size_t width, std::size_t height) {
  cfg.validate();
  if (g.output_dim() != a.cols() || width * height != a.cols()) {
    throw DimensionError("drgd: generator output, image shape and operator columns disagree");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t p = g.latent_dim();

  SeededRng rng(cfg.seed);
  LatentVector z0(p);
  for (auto &v : z0) {
    v = rng.normal();
  }

  const std::size_t every = log_interval(std::max<std::size_t>(cfg.i_max, 1));
  DrgdResult result;
  double eta = cfg.step_size;
  for (std::size_t attempt = 0;; ++attempt) {
    LatentVector z = z0;
    RealVector m1(p, 0.0);
    RealVector m2(p, 0.0);
    double beta1_pow = 1.0;
    double beta2_pow = 1.0;
    std::vector<double> trace;
    bool diverged = false;

    for (std::size_t i = 0; i < cfg.i_max; ++i) {
      const Evaluation ev = evaluate(a, y, g, z, cfg.reg_weight, width, height, true);
      if (!std::isfinite(ev.objective) || !all_finite(ev.gradient)) {
        diverged = true;
        break;
      }
      if (i % every == 0) {
        trace.push_back(ev.objective);
      }
      if (cfg.optimizer == LatentOptimizer::PlainSubgradient) {
        for (std::size_t j = 0; j < p; ++j) {
          z[j] -= eta * ev.gradient[j];
        }
      } else {
        beta1_pow *= cfg.adam_beta1;
        beta2_pow *= cfg.adam_beta2;
        for (std::size_t j = 0; j < p; ++j) {
          const double gj = ev.gradient[j];
          m1[j] = cfg.adam_beta1 * m1[j] + (1.0 - cfg.adam_beta1) * gj;
          m2[j] = cfg.adam_beta2 * m2[j] + (1.0 - cfg.adam_beta2) * gj * gj;
          const double m_hat = m1[j] / (1.0 - beta1_pow);
          const double v_hat = m2[j] / (1.0 - beta2_pow);
          z[j] -= eta * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
        }
      }
      if (!all_finite(z)) {
        diverged = true;
        break;
      }
    }

    double final_objective = 0.0;
    if (!diverged) {
      final_objective = drgd_objective(a, y, g, z, cfg.reg_weight, width, height);
      diverged = !std::isfinite(final_objective);
    }
    if (diverged && attempt < cfg.max_step_halvings) {
      eta *= 0.5;
      continue;
    }
    if (diverged) {
      throw std::runtime_error("drgd: objective diverged after " + std::to_string(attempt) +
                               " step halvings");
    }
    trace.push_back(final_objective);
    result.latent = std::move(z);
    result.report.loss_trace = std::move(trace);
    result.report.iterations_run = cfg.i_max;
    result.step_halvings = attempt;
    result.final_step_size = eta;
    break;
  }
  result.report.reconstruction = generator_forward(g, result.latent);
  result.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

DeepInitReport deepinit(const SensingOperator &a, std::span<const double> y,
                        const GeneratorNet &g, const DrgdConfig &cfg, std::size_t k_max,
                        SeededRng &rng, std::size_t width, std::size_t height,
                        const KaczmarzOptions &options) {
  DeepInitReport out;
  out.init = drgd(a, y, g, cfg, width, height);
  out.kaczmarz = randomized_kaczmarz(a, y, out.init.report.reconstruction, k_max, rng, options);
  return out;
}

} // namespace phasekit
