#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "attnlab/delta.hpp"
#include "attnlab/rng.hpp"

using namespace attnlab;

namespace {

Matrix random_matrix(std::uint64_t seed, std::uint64_t stream, std::size_t rows,
                     std::size_t cols) {
  CounterRng rng(seed, stream, 17);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    m(i / cols, i % cols) = rng.gaussian(i);
  }
  return m;
}

AttentionProblem random_problem(std::uint64_t seed, std::size_t n,
                                std::size_t d) {
  return AttentionProblem(random_matrix(seed, 0, n, d),
                          random_matrix(seed, 1, n, d),
                          random_matrix(seed, 2, n, d));
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

DeltaConfig repeat_cfg(std::size_t gamma) {
  DeltaConfig cfg;
  cfg.gamma = gamma;
  cfg.imputation = Repeat{};
  return cfg;
}

}  // namespace

TEST_SUITE("delta") {

TEST_CASE("query row selection") {
  SUBCASE("n=8 gamma=2, no tail") {
    const auto sel = select_query_rows(8, repeat_cfg(2));
    CHECK(sel.stride_rows == std::vector<std::size_t>{0, 2, 4, 6});
    CHECK(sel.tail_start == 8);
  }
  SUBCASE("n=9 gamma=4, default tail of one") {
    const auto sel = select_query_rows(9, repeat_cfg(4));
    CHECK(sel.stride_rows == std::vector<std::size_t>{0, 4});
    CHECK(sel.tail_start == 8);
    CHECK(sel.full_rows() == std::vector<std::size_t>{0, 4, 8});
  }
  SUBCASE("long context stride count") {
    const auto sel = select_query_rows(131072, repeat_cfg(64));
    CHECK(sel.stride_rows.size() == 2048);
    CHECK(sel.tail_start == 131072);
  }
  SUBCASE("gamma larger than n clamps the tail") {
    const auto sel = select_query_rows(5, repeat_cfg(8));
    CHECK(sel.stride_rows == std::vector<std::size_t>{0});
    CHECK(sel.tail_start == 1);
  }
  SUBCASE("explicit tail must stay below n") {
    DeltaConfig cfg = repeat_cfg(4);
    cfg.tail_dense = 9;
    CHECK_THROWS_AS(select_query_rows(9, cfg), ConfigError);
  }
}

TEST_CASE("every row is governed by exactly one stride row or the tail") {
  for (std::size_t n : {5u, 8u, 9u, 64u, 100u}) {
    for (std::size_t gamma : {1u, 3u, 4u, 16u}) {
      const auto sel = select_query_rows(n, repeat_cfg(gamma));
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= sel.tail_start) continue;  // tail block
        const std::size_t g = sel.governing_stride(i);
        CHECK(g <= i);
        CHECK(i - g < gamma);
        CHECK(g % gamma == 0);
      }
      // Consecutive stride gaps never exceed gamma.
      for (std::size_t m = 1; m < sel.stride_rows.size(); ++m) {
        CHECK(sel.stride_rows[m] - sel.stride_rows[m - 1] <= gamma);
      }
    }
  }
}

TEST_CASE("strided dense rows") {
  const AttentionProblem p = random_problem(51, 8, 3);
  const AttentionResult dense = dense_attention(p);

  SUBCASE("row zero is the first value row") {
    const std::vector<std::size_t> rows{0};
    const auto out = strided_dense_rows(p, rows);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.output(0, c) == p.v(0, c));
  }
  SUBCASE("full selection reproduces dense attention") {
    std::vector<std::size_t> rows(8);
    for (std::size_t i = 0; i < 8; ++i) rows[i] = i;
    const auto out = strided_dense_rows(p, rows);
    CHECK(max_abs_diff(out.output, dense.output) <= 1e-12);
  }
  SUBCASE("subset matches the dense slice") {
    const std::vector<std::size_t> rows{3, 6};
    const auto out = strided_dense_rows(p, rows);
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(out.output(idx, c) - dense.output(rows[idx], c)) <= 1e-12);
      }
      CHECK(out.computed_entries[idx] == rows[idx] + 1);
    }
  }
  SUBCASE("out of range row throws") {
    const std::vector<std::size_t> rows{9};
    CHECK_THROWS_AS(strided_dense_rows(p, rows), DimensionError);
  }
}

TEST_CASE("gamma of one degenerates to dense attention") {
  const AttentionProblem p = random_problem(61, 20, 4);
  const AttentionResult dense = dense_attention(p);
  const auto pat = SparsityPattern::sink_window(1, 3);
  const auto delta = delta_attention(p, pat, repeat_cfg(1));
  CHECK(max_abs_diff(delta.result.output, dense.output) <= 1e-12);
  const auto recomputed = recompute_attention(p, pat, repeat_cfg(1));
  CHECK(max_abs_diff(recomputed.output, dense.output) <= 1e-12);
}

TEST_CASE("full-triangle pattern leaves nothing to correct") {
  const std::size_t n = 16;
  const AttentionProblem p = random_problem(62, n, 4);
  const AttentionResult dense = dense_attention(p);
  const auto outcome =
      delta_attention(p, SparsityPattern::full_causal(n), repeat_cfg(4));
  double delta_max = 0.0;
  for (std::size_t m = 0; m < outcome.trace.deltas.rows(); ++m) {
    for (std::size_t c = 0; c < outcome.trace.deltas.cols(); ++c) {
      delta_max = std::max(delta_max, std::abs(outcome.trace.deltas(m, c)));
    }
  }
  CHECK(delta_max <= 1e-12);
  CHECK(max_abs_diff(outcome.result.output, dense.output) <= 1e-12);
}

TEST_CASE("delta output equals the composition of the two references") {
  const std::size_t n = 16, d = 4;
  const AttentionProblem p = random_problem(63, n, d);
  const auto pat = SparsityPattern::sink_window(1, 2);
  const DeltaConfig cfg = repeat_cfg(4);

  const AttentionResult dense = dense_attention(p);
  const AttentionResult sparse = sparse_attention(p, pat);
  const auto outcome = delta_attention(p, pat, cfg);

  // Reference: sparse row plus (dense - sparse) looked up at the governing
  // stride row, built only from the two standalone results.
  const auto sel = select_query_rows(n, cfg);
  for (std::size_t i = 0; i < sel.tail_start; ++i) {
    const std::size_t g = sel.governing_stride(i);
    for (std::size_t c = 0; c < d; ++c) {
      const double expect =
          sparse.output(i, c) + (dense.output(g, c) - sparse.output(g, c));
      CHECK(std::abs(outcome.result.output(i, c) - expect) <= 1e-12);
    }
  }
  for (std::size_t i = sel.tail_start; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      CHECK(std::abs(outcome.result.output(i, c) - dense.output(i, c)) <= 1e-12);
    }
  }
}

TEST_CASE("stride rows reproduce their dense rows under repeat") {
  const AttentionProblem p = random_problem(64, 24, 4);
  const auto pat = SparsityPattern::sink_window(2, 3);
  const DeltaConfig cfg = repeat_cfg(5);
  const AttentionResult dense = dense_attention(p);
  const auto outcome = delta_attention(p, pat, cfg);
  for (std::size_t row : outcome.trace.selected_rows) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(std::abs(outcome.result.output(row, c) - dense.output(row, c)) <=
            1e-12);
    }
  }
}

TEST_CASE("recompute swaps dense rows and propagates nothing") {
  const std::size_t n = 16, d = 4;
  const AttentionProblem p = random_problem(65, n, d);
  const auto pat = SparsityPattern::sink_window(1, 2);
  const DeltaConfig cfg = repeat_cfg(4);

  const AttentionResult sparse = sparse_attention(p, pat);
  const AttentionResult recomputed = recompute_attention(p, pat, cfg);
  const auto outcome = delta_attention(p, pat, cfg);
  const auto sel = select_query_rows(n, cfg);

  for (std::size_t i = 0; i < n; ++i) {
    if (sel.is_full_row(i)) continue;
    // Non-stride rows are bitwise the sparse rows.
    for (std::size_t c = 0; c < d; ++c) {
      CHECK(recomputed.output(i, c) == sparse.output(i, c));
    }
    // And delta differs from recompute exactly by the repeated correction.
    const std::size_t g = sel.governing_stride(i);
    const std::size_t m = g / cfg.gamma;
    for (std::size_t c = 0; c < d; ++c) {
      const double expect = recomputed.output(i, c) + outcome.trace.deltas(m, c);
      CHECK(std::abs(outcome.result.output(i, c) - expect) <= 1e-12);
    }
  }
  for (std::size_t row : sel.full_rows()) {
    for (std::size_t c = 0; c < d; ++c) {
      CHECK(std::abs(recomputed.output(row, c) -
                     outcome.result.output(row, c)) <= 1e-12);
    }
  }
}

TEST_CASE("tail rows are dense") {
  const std::size_t n = 10, d = 3;
  const AttentionProblem p = random_problem(66, n, d);
  const auto pat = SparsityPattern::sink_window(1, 2);
  const DeltaConfig cfg = repeat_cfg(4);  // tail = 10 mod 4 = 2
  const AttentionResult dense = dense_attention(p);
  const auto outcome = delta_attention(p, pat, cfg);
  CHECK(outcome.trace.tail_start == 8);
  for (std::size_t i = 8; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      CHECK(std::abs(outcome.result.output(i, c) - dense.output(i, c)) <= 1e-12);
    }
    CHECK(outcome.result.computed_entries[i] == i + 1);
  }
}

TEST_CASE("trace rows are strictly increasing with bounded gaps") {
  const AttentionProblem p = random_problem(70, 50, 3);
  const auto outcome = delta_attention(
      p, SparsityPattern::sink_window(1, 4), repeat_cfg(7));
  const auto& rows = outcome.trace.selected_rows;
  REQUIRE(!rows.empty());
  CHECK(rows.front() == 0);
  for (std::size_t m = 1; m < rows.size(); ++m) {
    CHECK(rows[m] > rows[m - 1]);
    CHECK(rows[m] - rows[m - 1] <= 7);
  }
  CHECK(outcome.trace.deltas.rows() == rows.size());
}

TEST_CASE("cost additivity is an exact integer identity") {
  const std::size_t n = 37, d = 4;
  const AttentionProblem p = random_problem(67, n, d);
  const auto pat = SparsityPattern::sink_window(2, 5);
  const DeltaConfig cfg = repeat_cfg(6);

  const AttentionResult sparse = sparse_attention(p, pat);
  const auto outcome = delta_attention(p, pat, cfg);
  const auto sel = select_query_rows(n, cfg);

  std::size_t sparse_total = 0, delta_total = 0, extras = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sparse_total += sparse.computed_entries[i];
    delta_total += outcome.result.computed_entries[i];
  }
  for (std::size_t row : sel.full_rows()) {
    extras += (row + 1) - sparse.computed_entries[row];
  }
  CHECK(delta_total == sparse_total + extras);
}

TEST_CASE("imputation modes") {
  SUBCASE("repeat with a single delta row fills everything") {
    DeltaTrace trace;
    trace.selected_rows = {0};
    trace.deltas = Matrix(1, 2, {1.5, -2.0});
    trace.gamma = 4;
    trace.tail_start = 6;
    trace.n = 6;
    const Matrix out = impute_deltas(trace, 6, repeat_cfg(4));
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(out(i, 0) == 1.5);
      CHECK(out(i, 1) == -2.0);
    }
  }
  SUBCASE("linear interpolation between zero and one") {
    DeltaTrace trace;
    trace.selected_rows = {0, 4};
    trace.deltas = Matrix(2, 2, {0.0, 0.0, 1.0, 1.0});
    trace.gamma = 4;
    trace.tail_start = 8;
    trace.n = 8;
    DeltaConfig cfg = repeat_cfg(4);
    cfg.imputation = Linear{};
    const Matrix out = impute_deltas(trace, 8, cfg);
    const double expect[4] = {0.0, 0.25, 0.5, 0.75};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(out(i, 0) == doctest::Approx(expect[i]).epsilon(1e-15));
      CHECK(out(i, 1) == doctest::Approx(expect[i]).epsilon(1e-15));
    }
    // Last segment has no successor: plain repeat.
    for (std::size_t i = 4; i < 8; ++i) CHECK(out(i, 0) == 1.0);
  }
  SUBCASE("ema with beta one is bitwise repeat") {
    const AttentionProblem p = random_problem(68, 24, 4);
    const auto pat = SparsityPattern::sink_window(1, 3);
    DeltaConfig ema_cfg = repeat_cfg(4);
    ema_cfg.imputation = Ema{1.0};
    const auto a = delta_attention(p, pat, repeat_cfg(4));
    const auto b = delta_attention(p, pat, ema_cfg);
    CHECK(a.result.output == b.result.output);
  }
  SUBCASE("ema smoothing blends the repeated stream") {
    DeltaTrace trace;
    trace.selected_rows = {0, 2};
    trace.deltas = Matrix(2, 1, {1.0, 3.0});
    trace.gamma = 2;
    trace.tail_start = 4;
    trace.n = 4;
    DeltaConfig cfg = repeat_cfg(2);
    cfg.imputation = Ema{0.5};
    const Matrix out = impute_deltas(trace, 4, cfg);
    // stream = 1,1,3,3 -> ema: 1, 1, 2, 2.5
    CHECK(out(0, 0) == 1.0);
    CHECK(out(1, 0) == 1.0);
    CHECK(out(2, 0) == 2.0);
    CHECK(out(3, 0) == 2.5);
  }
  SUBCASE("abg filter follows the position/velocity/acceleration updates") {
    DeltaTrace trace;
    trace.selected_rows = {0, 2};
    trace.deltas = Matrix(2, 1, {1.0, 3.0});
    trace.gamma = 2;
    trace.tail_start = 4;
    trace.n = 4;
    DeltaConfig cfg = repeat_cfg(2);
    const double alpha = 0.2, beta = 0.05, g = 0.003;
    cfg.imputation = AbgFilter{alpha, beta, g};
    const Matrix out = impute_deltas(trace, 4, cfg);
    // Independent scalar reference of the same filter.
    const double stream[4] = {1.0, 1.0, 3.0, 3.0};
    double pos = stream[0], vel = 0.0, acc = 0.0;
    CHECK(out(0, 0) == stream[0]);
    for (std::size_t i = 1; i < 4; ++i) {
      const double p_hat = pos + vel + 0.5 * acc;
      const double v_hat = vel + acc;
      const double r = stream[i] - p_hat;
      pos = p_hat + alpha * r;
      vel = v_hat + beta * r;
      acc = acc + g * r;
      CHECK(out(i, 0) == doctest::Approx(pos).epsilon(1e-15));
    }
  }
}

TEST_CASE("impute rejects an empty trace") {
  DeltaTrace trace;
  trace.gamma = 4;
  CHECK_THROWS_AS(impute_deltas(trace, 8, repeat_cfg(4)), EmptySupportError);
}

TEST_CASE("delta config validation") {
  DeltaConfig cfg;
  cfg.gamma = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.gamma = 4;
  cfg.imputation = Ema{0.0};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.imputation = Ema{1.5};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.imputation = AbgFilter{0.1, std::nan(""), 0.0};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("gamma above n computes everything densely") {
  const AttentionProblem p = random_problem(69, 5, 3);
  const AttentionResult dense = dense_attention(p);
  const auto outcome =
      delta_attention(p, SparsityPattern::sink_window(1, 2), repeat_cfg(8));
  CHECK(max_abs_diff(outcome.result.output, dense.output) <= 1e-12);
}

}  // TEST_SUITE
