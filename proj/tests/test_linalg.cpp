#include <doctest.h>

#include <cmath>

#include "attnlab/linalg.hpp"
#include "attnlab/rng.hpp"

using namespace attnlab;

namespace {

// Independent reference: plain ijk triple loop.
Matrix matmul_reference(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  CounterRng rng(seed, 0, 99);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.gaussian(i * cols + j);
  }
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("matrix construction validates shape and finiteness") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), DimensionError);
  const Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  for (double x : m.data()) CHECK(x == 0.0);
}

TEST_CASE("matmul identity is a no-op") {
  const Matrix m(2, 2, {3.5, -1.0, 2.0, 0.25});
  const Matrix out = matmul(Matrix::identity(2), m);
  CHECK(out == m);
}

TEST_CASE("matmul 2x2 by 2x1 hand value") {
  const Matrix a(2, 2, {1, 2, 3, 4});
  const Matrix b(2, 1, {0, 1});
  const Matrix out = matmul(a, b);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == 4.0);
}

TEST_CASE("matmul shape mismatch throws") {
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 2)), DimensionError);
}

TEST_CASE("matmul matches triple-loop reference on seeded inputs") {
  const Matrix a = random_matrix(7, 8, 4);
  const Matrix b = random_matrix(8, 4, 3);
  const Matrix expect = matmul_reference(a, b);
  const Matrix got = matmul(a, b);
  for (std::size_t i = 0; i < expect.rows(); ++i) {
    for (std::size_t j = 0; j < expect.cols(); ++j) {
      const double denom = std::max(1.0, std::abs(expect(i, j)));
      CHECK(std::abs(got(i, j) - expect(i, j)) / denom <= 1e-9);
    }
  }
  // Larger shapes, several seeds.
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const std::size_t n = 16 * seed;
    const Matrix x = random_matrix(seed * 11, n, n);
    const Matrix y = random_matrix(seed * 13, n, n);
    CHECK(max_abs_diff(matmul(x, y), matmul_reference(x, y)) <=
          1e-9 * static_cast<double>(n));
  }
}

TEST_CASE("masked softmax uniform case") {
  const RowVector scores{0.0, 0.0, 0.0};
  const MaskRow mask{1, 1, 1};
  const SoftmaxRow out = masked_softmax_row(scores, mask);
  CHECK(out.normalizer == doctest::Approx(3.0).epsilon(1e-15));
  for (double p : out.probs) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("masked softmax single support") {
  const RowVector scores{10.0, -10.0};
  const MaskRow mask{1, 0};
  const SoftmaxRow out = masked_softmax_row(scores, mask);
  CHECK(out.probs[0] == 1.0);
  CHECK(out.probs[1] == 0.0);
  CHECK(out.max_score == 10.0);
}

TEST_CASE("masked softmax against direct exp sum") {
  const RowVector scores{1.0, 2.0, 3.0};
  const MaskRow mask{1, 0, 1};
  const SoftmaxRow out = masked_softmax_row(scores, mask);
  const double z = std::exp(1.0) + std::exp(3.0);
  CHECK(out.probs[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(out.probs[1] == 0.0);
  CHECK(out.probs[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
}

TEST_CASE("masked softmax rejects empty support") {
  CHECK_THROWS_AS(masked_softmax_row(RowVector{1.0, 2.0}, MaskRow{0, 0}),
                  EmptySupportError);
}

TEST_CASE("masked softmax sums to one for wide score spans") {
  CounterRng rng(99, 0, 0);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const std::size_t len = 1 + rng.below(trial * 3, 40);
    RowVector scores(len);
    MaskRow mask(len, 0);
    bool any = false;
    for (std::size_t i = 0; i < len; ++i) {
      // Span up to 700 between the smallest and largest score.
      scores[i] = 700.0 * (rng.uniform01(trial * 1000 + i) - 0.5);
      mask[i] = rng.word(trial * 2000 + i) & 1;
      any = any || mask[i];
    }
    if (!any) mask[0] = 1;
    const SoftmaxRow out = masked_softmax_row(scores, mask);
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (!mask[i]) CHECK(out.probs[i] == 0.0);
      sum += out.probs[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("masked softmax is shift invariant") {
  CounterRng rng(123, 1, 0);
  RowVector scores(16);
  MaskRow mask(16, 1);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = 5.0 * rng.gaussian(i);
  }
  const SoftmaxRow base = masked_softmax_row(scores, mask);
  for (double c : {-37.5, 1e-3, 250.0}) {
    RowVector shifted = scores;
    for (double& s : shifted) s += c;
    const SoftmaxRow out = masked_softmax_row(shifted, mask);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      CHECK(std::abs(out.probs[i] - base.probs[i]) < 1e-12);
    }
  }
}

TEST_CASE("cosine identities") {
  const RowVector u{1.0, 2.0, 3.0};
  CHECK(cosine(u, u) == 1.0);
  CHECK(cosine(RowVector{1, 0}, RowVector{0, 1}) == 0.0);
  CHECK(cosine(RowVector{1, 1}, RowVector{1, -1}) == 0.0);
  CHECK_THROWS_AS(cosine(RowVector{1.0}, RowVector{1.0, 2.0}), DimensionError);
}

TEST_CASE("cosine zero norm is a flagged sentinel") {
  warnings().reset();
  CHECK(cosine(RowVector{0.0, 0.0}, RowVector{1.0, 2.0}) == 0.0);
  CHECK(warnings().zero_norm_cosine.load() == 1);
}

TEST_CASE("cosine is scale invariant for positive scalars") {
  CounterRng rng(5, 2, 0);
  RowVector u(8), v(8);
  for (std::size_t i = 0; i < 8; ++i) {
    u[i] = rng.gaussian(i);
    v[i] = rng.gaussian(100 + i);
  }
  const double base = cosine(u, v);
  for (double s : {1e-6, 0.5, 42.0, 1e9}) {
    RowVector su = u;
    for (double& x : su) x *= s;
    CHECK(std::abs(cosine(su, v) - base) <= 1e-12);
  }
}

}  // TEST_SUITE
