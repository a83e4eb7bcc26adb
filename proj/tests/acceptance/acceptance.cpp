// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "phasekit/classical.hpp"
#include "phasekit/drgd.hpp"
#include "phasekit/experiment.hpp"
#include "phasekit/metrics.hpp"
#include "phasekit/sensing.hpp"
#include "../support/oracles.hpp"

using namespace phasekit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

DenseLayer random_layer(SeededRng &rng, std::size_t in, std::size_t out, Activation act) {
  DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out), act};
  for (auto &w : l.weights) w = rng.normal() / std::sqrt(static_cast<double>(in));
  for (auto &b : l.bias) b = 0.1 * rng.normal();
  return l;
}

double aligned_error(const Signal &est, const Signal &truth) {
  return relative_error(sign_align(est, truth), truth);
}

// 1. WF and DRGD gradients against central differences, n = 16, m = 64, p = 4.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  double worst_wf = 0.0;
  double worst_drgd = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SeededRng rng(derive_seed(0xa11, trial));
    const SensingOperator a(gaussian_complex(rng, 64, 16), SensingKind::Gaussian);
    Signal truth(16);
    for (auto &v : truth) v = rng.uniform();
    const auto y = intensity_forward(a, truth);

    Signal x(16);
    for (auto &v : x) v = rng.normal();
    const auto g = intensity_loss_gradient(a, y, x, {});
    const auto fd = oracle::fd_gradient(
        [&](const std::vector<double> &p) { return intensity_loss(a, y, p); }, x, 1e-6);
    worst_wf = std::max(worst_wf, oracle::rel_diff(g, fd));

    const GeneratorNet net({random_layer(rng, 4, 12, Activation::Tanh),
                            random_layer(rng, 12, 16, Activation::Sigmoid)});
    std::vector<double> z(4);
    for (auto &v : z) v = rng.normal();
    const auto gz = drgd_gradient(a, y, net, z, 0.0, 4, 4);
    const auto fdz = oracle::fd_gradient(
        [&](const std::vector<double> &p) { return drgd_objective(a, y, net, p, 0.0, 4, 4); }, z,
        1e-6);
    worst_drgd = std::max(worst_drgd, oracle::rel_diff(gz, fdz));
  }
  const double t = seconds_since(start);
  return {worst_wf < 1e-5 && worst_drgd < 1e-4 && t < 10.0,
          fmt::format("worst rel. diff WF {:.2e} (< 1e-5), DRGD {:.2e} (< 1e-4), {:.2f} s (< 10)",
                      worst_wf, worst_drgd, t)};
}

// 2. Physical chain against effective rows at 28 x 28.
Outcome measurement_identity() {
  const auto start = Clock::now();
  const DiffractionSpec ms{0.856e-3, 0.01, 0.5e-3, 28};
  const DiffractionSpec sd{0.856e-3, 0.175, 0.5e-3, 28};
  const ComplexMatrix d_ms = build_diffraction_matrix(ms);
  const ComplexMatrix d_sd = build_diffraction_matrix(sd);
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SeededRng rng(derive_seed(0xa12, trial));
    const MaskSet masks = generate_masks(rng, 1, 784);
    Signal x(784);
    for (auto &v : x) v = rng.uniform();
    const double physical = physical_forward(masks, d_ms, d_sd, x)[0];
    const double modelled = intensity_forward(effective_rows(masks, d_ms, d_sd), x)[0];
    worst = std::max(worst, std::abs(physical - modelled) / std::abs(physical));
  }
  const double t = seconds_since(start);
  return {worst < 1e-10 && t < 60.0,
          fmt::format("worst rel. diff {:.2e} (< 1e-10), {:.2f} s (< 60)", worst, t)};
}

// 3. Kaczmarz from a spectral start, n = 64, m = 6n, 2e5 iterations.
Outcome kaczmarz_recovery() {
  const auto start = Clock::now();
  int recovered = 0;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    SeededRng rng(derive_seed(0xa13, trial));
    const SensingOperator a(gaussian_complex(rng, 384, 64), SensingKind::Gaussian);
    Signal truth(64);
    for (auto &v : truth) v = rng.normal();
    const auto y = intensity_forward(a, truth);
    const Signal x0 = spectral_init(a, y);
    const auto rep = randomized_kaczmarz(a, y, x0, 200000, rng);
    const double err = aligned_error(rep.reconstruction, truth);
    worst = std::max(worst, err);
    recovered += err < 1e-3;
  }
  const double t = seconds_since(start);
  return {recovered >= 18 && t < 120.0,
          fmt::format("{}/20 seeds below 1e-3 (>= 18), worst {:.2e}, {:.1f} s (< 120)", recovered,
                      worst, t)};
}

// 4. Every Kaczmarz update satisfies its selected measurement.
Outcome kaczmarz_projection() {
  double worst = 0.0;
  std::size_t steps = 0;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    SeededRng rng(derive_seed(0xa14, trial));
    const SensingOperator a(gaussian_complex(rng, 256, 64), SensingKind::Gaussian);
    Signal truth(64);
    for (auto &v : truth) v = rng.normal();
    const auto y = intensity_forward(a, truth);
    KaczmarzOptions opts;
    opts.on_step = [&](const KaczmarzStep &s) {
      Complex u{};
      const auto row = a.matrix().row(s.row);
      for (std::size_t j = 0; j < row.size(); ++j) u += row[j] * s.iterate[j];
      worst = std::max(worst, std::abs(std::norm(u) - y[s.row]) / y[s.row]);
      ++steps;
    };
    Signal x0(64);
    for (auto &v : x0) v = rng.normal();
    randomized_kaczmarz(a, y, x0, 20000, rng, opts);
  }
  return {worst < 1e-10 && steps == 100000,
          fmt::format("{} updates checked, worst rel. residual {:.2e} (< 1e-10)", steps, worst)};
}

// 5. Rank of the modulator-to-scene propagation versus stand-off distance.
Outcome rank_degradation() {
  std::vector<std::size_t> ranks;
  for (double d : {0.001, 0.01, 0.02}) {
    ranks.push_back(numerical_rank(build_diffraction_matrix({0.856e-3, d, 0.5e-3, 14}), 1e-6));
  }
  const bool pass = ranks[0] >= ranks[1] && ranks[1] >= ranks[2] && ranks[2] < ranks[0];
  return {pass, fmt::format("ranks at 1 / 10 / 20 mm: {} / {} / {} (non-increasing, 20 < 1)",
                            ranks[0], ranks[1], ranks[2])};
}

LatentVector random_latent(SeededRng &rng, std::size_t p) {
  LatentVector z(p);
  for (auto &v : z) v = rng.normal();
  return z;
}

// 6. DeepInit against random-start Kaczmarz with targets in range of the
// synthetic generator.
Outcome deepinit_vs_random() {
  const auto start = Clock::now();
  const GeneratorNet g = synthetic_generator();
  const std::vector<double> rates{0.25, 0.5, 1.0};
  std::vector<std::string> parts;
  bool pass = true;
  for (std::size_t ri = 0; ri < rates.size(); ++ri) {
    const std::size_t m = measurement_count(rates[ri], 784);
    double deep = 0.0;
    double plain = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const std::uint64_t seed = derive_seed(0xa16, ri, trial);
      SeededRng rng(seed);
      const Signal truth = generator_forward(g, random_latent(rng, g.latent_dim()));
      const SensingOperator a(gaussian_complex(rng, m, 784), SensingKind::Gaussian);
      const auto y = intensity_forward(a, truth);

      DrgdConfig cfg;
      cfg.seed = derive_seed(seed, 4);
      SeededRng rk_deep(derive_seed(seed, 3));
      const DeepInitReport di = deepinit(a, y, g, cfg, 100000, rk_deep, 28, 28);
      deep += score(di.reconstruction(), truth, 28, 28).ssim;

      ClassicalConfig init;
      init.init = InitKind::RandomUnit;
      init.seed = derive_seed(seed, 5);
      SeededRng rk_plain(derive_seed(seed, 3));
      const auto rk = randomized_kaczmarz(a, y, initial_estimate(a, y, init), 100000, rk_plain);
      plain += score(rk.reconstruction, truth, 28, 28).ssim;
    }
    deep /= 20.0;
    plain /= 20.0;
    pass = pass && deep - plain >= 0.2;
    parts.push_back(fmt::format("m/n {}: {:.3f} vs {:.3f}", rates[ri], deep, plain));
  }
  const double t = seconds_since(start);
  pass = pass && t < 600.0;
  return {pass, fmt::format("mean SSIM DeepInit vs random RK ({}); margin >= 0.2, {:.0f} s (< 600)",
                            fmt::join(parts, "; "), t)};
}

// Smooth bump centred at (cx, cy) pixels.
Signal add_bump(Signal x, double cx, double cy, double amplitude) {
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t c = 0; c < 28; ++c) {
      const double dx = static_cast<double>(c) - cx;
      const double dy = static_cast<double>(r) - cy;
      x[r * 28 + c] = std::clamp(x[r * 28 + c] + amplitude * std::exp(-(dx * dx + dy * dy) / 8.0),
                                 0.0, 1.0);
    }
  }
  return x;
}

// 7. Targets off the generator range, m = 4n.
Outcome model_error_escape() {
  const GeneratorNet g = synthetic_generator();
  const std::size_t m = 4 * 784;
  int wins = 0;
  double sum_drgd = 0.0;
  double sum_deep = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(0xa17, trial);
    SeededRng rng(seed);
    const Signal base = generator_forward(g, random_latent(rng, g.latent_dim()));
    const double cx = 6.0 + 16.0 * rng.uniform();
    const double cy = 6.0 + 16.0 * rng.uniform();
    const Signal truth = add_bump(base, cx, cy, 0.6);
    const SensingOperator a(gaussian_complex(rng, m, 784), SensingKind::Gaussian);
    const auto y = intensity_forward(a, truth);
    DrgdConfig cfg;
    cfg.seed = derive_seed(seed, 4);
    SeededRng rk(derive_seed(seed, 3));
    const DeepInitReport di = deepinit(a, y, g, cfg, 100000, rk, 28, 28);
    const double e_drgd = aligned_error(di.init.report.reconstruction, truth);
    const double e_deep = aligned_error(di.reconstruction(), truth);
    sum_drgd += e_drgd;
    sum_deep += e_deep;
    wins += e_deep < e_drgd;
  }
  return {wins >= 16, fmt::format("DeepInit below DRGD error on {}/20 seeds (>= 16); mean error "
                                  "DRGD {:.3e}, DeepInit {:.3e}",
                                  wins, sum_drgd / 20.0, sum_deep / 20.0)};
}

// 8. TWF with truncation disabled against WF.
Outcome twf_wf_equivalence() {
  int identical = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    SeededRng rng(derive_seed(0xa18, trial));
    const SensingOperator a(gaussian_complex(rng, 192, 32), SensingKind::Gaussian);
    Signal truth(32);
    for (auto &v : truth) v = rng.normal();
    const auto y = intensity_forward(a, truth);
    ClassicalConfig cfg;
    cfg.k_max = 200;
    cfg.twf_lb = 0.0;
    cfg.twf_ub = 1e12;
    const auto wf = wirtinger_flow(a, y, cfg);
    const auto twf = truncated_wirtinger_flow(a, y, cfg);
    identical += wf.reconstruction == twf.reconstruction && wf.loss_trace == twf.loss_trace;
  }
  return {identical == 10, fmt::format("{}/10 instances bitwise identical", identical)};
}

// 9. PSNR and SSIM unit cases plus loop oracles.
Outcome metric_suite() {
  SeededRng rng(0xa19);
  Signal truth(784);
  for (auto &v : truth) v = rng.uniform() * 0.8;
  Signal offset(truth);
  for (auto &v : offset) v += 0.1;
  const double p = psnr(offset, truth);
  const double self = ssim(truth, truth, 28, 28);

  Signal other(truth);
  for (auto &v : other) v = std::clamp(v + 0.3 * (rng.uniform() - 0.5), 0.0, 1.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < 784; ++i) sq += (other[i] - truth[i]) * (other[i] - truth[i]);
  const double psnr_oracle = 10.0 * std::log10(784.0 / sq);
  const double psnr_gap = std::abs(psnr(other, truth) - psnr_oracle);
  const double ssim_gap =
      std::abs(ssim(other, truth, 28, 28) - oracle::ssim(other, truth, 28, 28, 11, 1.5));
  const bool pass = std::abs(p - 20.0) < 1e-9 && std::abs(self - 1.0) < 1e-12 && psnr_gap < 1e-10 &&
                    ssim_gap < 1e-6 && std::isinf(psnr(truth, truth));
  return {pass, fmt::format("offset PSNR {:.12f} dB, SSIM(x,x) {:.15f}, oracle gaps PSNR {:.1e} "
                            "SSIM {:.1e}",
                            p, self, psnr_gap, ssim_gap)};
}

std::string masked_csv(const std::vector<ResultRow> &rows) {
  std::string out;
  for (ResultRow r : rows) {
    r.wall_time_s = 0.0;
    r.init_time_s = 0.0;
    out += csv_line(r) + "\n";
  }
  return out;
}

// 10. Two identical runs give identical CSV content apart from timing.
Outcome determinism() {
  ExperimentConfig cfg;
  cfg.dataset = DatasetKind::SheppLogan;
  cfg.algorithm = Algorithm::DeepInit;
  cfg.generator_weights = kSyntheticWeights;
  cfg.sampling_rates = {0.5, 2.0};
  cfg.num_images = 2;
  cfg.k_max = 5000;
  cfg.i_max = 50;
  cfg.seed = 2024;
  const std::string first = masked_csv(run_experiment(cfg));
  cfg.threads = 2;
  const std::string second = masked_csv(run_experiment(cfg));
  return {first == second && !first.empty(),
          fmt::format("{} bytes compared, {}", first.size(),
                      first == second ? "identical" : "different")};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char *name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "measurement-model identity", measurement_identity},
      {3, "Kaczmarz exact recovery", kaczmarz_recovery},
      {4, "Kaczmarz projection property", kaczmarz_projection},
      {5, "propagation rank degradation", rank_degradation},
      {6, "DeepInit beats random-start Kaczmarz", deepinit_vs_random},
      {7, "model-error escape", model_error_escape},
      {8, "TWF equals WF without truncation", twf_wf_equivalence},
      {9, "metric unit suite", metric_suite},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
