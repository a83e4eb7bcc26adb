#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "phasekit/rng.hpp"
#include "../support/oracles.hpp"

using phasekit::SeededRng;

TEST_CASE("raw stream matches the reference xoshiro256** seeded by splitmix64") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefcafef00dULL}) {
    SeededRng rng(seed);
    oracle::Xoshiro ref(seed);
    for (int i = 0; i < 1000; ++i) {
      REQUIRE(rng.next_u64() == ref.next());
    }
  }
}

TEST_CASE("uniform uses the top 53 bits") {
  SeededRng rng(7);
  oracle::Xoshiro ref(7);
  for (int i = 0; i < 100; ++i) {
    const double u = rng.uniform();
    CHECK(u == static_cast<double>(ref.next() >> 11) / 9007199254740992.0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("same seed gives the same stream, different seeds differ") {
  SeededRng a(123);
  SeededRng b(123);
  SeededRng c(124);
  int same_as_c = 0;
  for (int i = 0; i < 100; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());
    same_as_c += va == c.normal();
  }
  CHECK(same_as_c == 0);
}

TEST_CASE("uniform_index stays in range and covers it") {
  SeededRng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_index(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("normal and complex normal moments") {
  SeededRng rng(99);
  const int count = 200000;
  double sum = 0.0;
  double sq = 0.0;
  double c_sq = 0.0;
  double c_re_sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
    const auto c = rng.complex_normal();
    c_sq += std::norm(c);
    c_re_sq += c.real() * c.real();
  }
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::abs(sq / count - 1.0) < 0.01);
  CHECK(std::abs(c_sq / count - 1.0) < 0.01);
  CHECK(std::abs(c_re_sq / count - 0.5) < 0.01);
}

TEST_CASE("bernoulli frequency") {
  SeededRng rng(3);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) {
    hits += rng.bernoulli(0.3);
  }
  CHECK(std::abs(hits / 100000.0 - 0.3) < 0.01);
}

TEST_CASE("derived seeds are distinct and reproducible") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t a = 0; a < 20; ++a) {
    for (std::uint64_t b = 0; b < 20; ++b) {
      seeds.insert(phasekit::derive_seed(11, a, b));
    }
  }
  CHECK(seeds.size() == 400);
  CHECK(phasekit::derive_seed(11, 2, 3) == phasekit::derive_seed(11, 2, 3));
  CHECK(phasekit::derive_seed(11, 2, 3) != phasekit::derive_seed(12, 2, 3));
  CHECK(phasekit::derive_seed(11, 2, 3) != phasekit::derive_seed(11, 3, 2));
}
