#include <benchmark/benchmark.h>

#include <vector>

#include "phasekit/classical.hpp"
#include "phasekit/drgd.hpp"
#include "phasekit/sensing.hpp"

using namespace phasekit;

namespace {

constexpr std::size_t kN = 784;

SensingOperator gaussian_operator(std::size_t m) {
  SeededRng rng(1);
  return {gaussian_complex(rng, m, kN), SensingKind::Gaussian};
}

Signal smooth_target() {
  return generator_forward(synthetic_generator(), std::vector<double>{1.0, -0.5, 0.3, 0.8, -1.2, 0.1, 0.4, -0.7});
}

} // namespace

static void BM_Matvec(benchmark::State &state) {
  const auto a = gaussian_operator(static_cast<std::size_t>(state.range(0)));
  const Signal x = smooth_target();
  for (auto _ : state) {
    benchmark::DoNotOptimize(matvec(a.matrix(), x));
  }
}
BENCHMARK(BM_Matvec)->Arg(196)->Arg(784)->Arg(3136)->Unit(benchmark::kMicrosecond);

static void BM_KaczmarzSteps(benchmark::State &state) {
  const auto a = gaussian_operator(4 * kN);
  const Signal x = smooth_target();
  const auto y = intensity_forward(a, x);
  const Signal x0(kN, 0.1);
  for (auto _ : state) {
    SeededRng rng(2);
    benchmark::DoNotOptimize(randomized_kaczmarz(a, y, x0, 10000, rng));
  }
}
BENCHMARK(BM_KaczmarzSteps)->Unit(benchmark::kMillisecond);

static void BM_SpectralInit(benchmark::State &state) {
  const auto a = gaussian_operator(static_cast<std::size_t>(state.range(0)));
  const auto y = intensity_forward(a, smooth_target());
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_init(a, y));
  }
}
BENCHMARK(BM_SpectralInit)->Arg(784)->Arg(3136)->Unit(benchmark::kMillisecond);

static void BM_DrgdGradient(benchmark::State &state) {
  const auto a = gaussian_operator(kN);
  const auto g = synthetic_generator();
  const auto y = intensity_forward(a, smooth_target());
  const std::vector<double> z(8, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drgd_gradient(a, y, g, z, 0.1, 28, 28));
  }
}
BENCHMARK(BM_DrgdGradient)->Unit(benchmark::kMicrosecond);

static void BM_EffectiveRows(benchmark::State &state) {
  const auto d_ms = build_diffraction_matrix({0.856e-3, 0.01, 0.5e-3, 28});
  const auto d_sd = build_diffraction_matrix({0.856e-3, 0.175, 0.5e-3, 28});
  SeededRng rng(3);
  const MaskSet masks = generate_masks(rng, static_cast<std::size_t>(state.range(0)), kN);
  for (auto _ : state) {
    benchmark::DoNotOptimize(effective_rows(masks, d_ms, d_sd));
  }
}
BENCHMARK(BM_EffectiveRows)->Arg(98)->Arg(784)->Unit(benchmark::kMillisecond);

static void BM_DiffractionMatrix(benchmark::State &state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_diffraction_matrix({0.856e-3, 0.01, 0.5e-3, 28}));
  }
}
BENCHMARK(BM_DiffractionMatrix)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
