#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace phasekit {

/// xoshiro256** seeded through splitmix64.
///
/// Stream version 1. Every draw is computed with integer arithmetic plus
/// IEEE double operations, so a given seed yields the same stream on every
/// platform. Normal variates use the Box-Muller transform and consume two
/// uniforms each; complex normals consume the same two uniforms and use both
/// branches of the transform.
class SeededRng {
public:
  static constexpr std::uint32_t kStreamVersion = 1;

  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal N(0, 1).
  double normal();

  /// Circular complex normal with E|c|^2 = 1 (real and imaginary parts each
  /// N(0, 1/2)).
  std::complex<double> complex_normal();

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for a (parent, a, b) triple, e.g. (seed, rate_index,
/// image_index) for one experiment cell.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0);

} // namespace phasekit
