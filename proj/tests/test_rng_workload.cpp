#include <doctest.h>

#include <cmath>

#include "attnlab/attention.hpp"
#include "attnlab/rng.hpp"
#include "attnlab/workload.hpp"

using namespace attnlab;

TEST_SUITE("rng_workload") {

TEST_CASE("counter rng is a pure function of key and counter") {
  const CounterRng a(42, 1, 2);
  const CounterRng b(42, 1, 2);
  CHECK(a.word(0) == b.word(0));
  CHECK(a.word(1234567) == b.word(1234567));
  // Out-of-order evaluation changes nothing.
  const std::uint64_t late = a.word(99);
  const std::uint64_t early = a.word(3);
  CHECK(late == b.word(99));
  CHECK(early == b.word(3));
}

TEST_CASE("streams split by seed, head and tensor differ") {
  const CounterRng base(42, 1, 2);
  CHECK(base.word(0) != CounterRng(43, 1, 2).word(0));
  CHECK(base.word(0) != CounterRng(42, 2, 2).word(0));
  CHECK(base.word(0) != CounterRng(42, 1, 3).word(0));
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  const CounterRng rng(7, 0, 0);
  for (std::uint64_t i = 0; i < 4096; ++i) {
    const double u = rng.uniform01(i);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("gaussian moments are roughly standard") {
  const CounterRng rng(11, 0, 0);
  const std::size_t count = 65536;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double g = rng.gaussian(i);
    sum += g;
    sq += g * g;
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("below produces bounded, exhaustive-ish draws") {
  const CounterRng rng(13, 0, 0);
  std::vector<std::size_t> hits(7, 0);
  for (std::uint64_t i = 0; i < 7000; ++i) ++hits[rng.below(i, 7)];
  for (std::size_t h : hits) CHECK(h > 700);
}

TEST_CASE("gaussian workload is deterministic per seed and head") {
  const auto a = generate_workload(GaussianWorkload{}, 42, 1, 32, 8);
  const auto b = generate_workload(GaussianWorkload{}, 42, 1, 32, 8);
  CHECK(a.problem.q == b.problem.q);
  CHECK(a.problem.k == b.problem.k);
  CHECK(a.problem.v == b.problem.v);
  const auto c = generate_workload(GaussianWorkload{}, 42, 2, 32, 8);
  CHECK(a.problem.q != c.problem.q);
  CHECK(!a.needle_truth.has_value());
}

TEST_CASE("gaussian workload entries carry the 1/sqrt(d) scale") {
  const std::size_t n = 256, d = 64;
  const auto wl = generate_workload(GaussianWorkload{}, 5, 0, n, d);
  double sq = 0.0;
  for (double x : wl.problem.q.data()) sq += x * x;
  const double var = sq / static_cast<double>(n * d);
  CHECK(var == doctest::Approx(1.0 / d).epsilon(0.1));
  CHECK(wl.problem.scale == doctest::Approx(0.125));
}

TEST_CASE("minimal gaussian workload is well formed") {
  const auto wl = generate_workload(GaussianWorkload{}, 1, 0, 2, 1);
  CHECK(wl.problem.seq_len() == 2);
  CHECK(wl.problem.head_dim() == 1);
}

TEST_CASE("needle capacity check") {
  CHECK_THROWS_AS(
      generate_workload(NeedleWorkload{9, 10.0}, 1, 0, 16, 4), ConfigError);
}

TEST_CASE("needle workload plants the target pair") {
  const std::size_t n = 64, d = 8;
  const auto wl = generate_workload(NeedleWorkload{4, 10.0}, 9, 0, n, d);
  REQUIRE(wl.needle_truth.has_value());
  REQUIRE(wl.needle_position.has_value());
  const std::size_t pos = *wl.needle_position;
  CHECK(pos < n - 1);
  for (std::size_t c = 0; c < d; ++c) {
    CHECK(wl.problem.v(pos, c) == (*wl.needle_truth)[c]);
    // Final query points at the planted key, amplified.
    CHECK(wl.problem.q(n - 1, c) == 10.0 * wl.problem.k(pos, c));
  }
}

TEST_CASE("a strong needle dominates the dense final row") {
  const std::size_t n = 256, d = 64;
  const auto wl = generate_workload(NeedleWorkload{8, 10.0}, 42, 0, n, d);
  const AttentionResult dense = dense_attention(wl.problem);
  const double score = cosine(dense.output.row(n - 1),
                              std::span<const double>(*wl.needle_truth));
  CHECK(score >= 0.99);
}

}  // TEST_SUITE
