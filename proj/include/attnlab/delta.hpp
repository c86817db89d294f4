#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "attnlab/attention.hpp"

namespace attnlab {

// How a stride row's correction vector is expanded to the rows it governs.
struct Repeat {};
struct Linear {};
struct Ema {
  double beta = 1.0;  // (0, 1]
};
struct AbgFilter {
  double alpha = 0.0;
  double beta = 0.0;
  double g = 0.0;  // acceleration coefficient
};
using Imputation = std::variant<Repeat, Linear, Ema, AbgFilter>;

struct DeltaConfig {
  std::size_t gamma = 16;
  // Number of trailing rows computed fully dense. Defaults to n mod gamma at
  // run time, which makes the corrected prefix divisible by gamma.
  std::optional<std::size_t> tail_dense;
  Imputation imputation = Repeat{};
};

void validate(const DeltaConfig& cfg);

// Partition of rows [0, n): stride rows {0, gamma, 2*gamma, ...} below
// tail_start, plus the dense tail block [tail_start, n).
struct QueryRowSelection {
  std::vector<std::size_t> stride_rows;
  std::size_t tail_start = 0;  // == n when there is no tail block
  std::size_t n = 0;
  std::size_t gamma = 1;

  bool is_full_row(std::size_t row) const;
  // Largest stride row at or below `row` (clamped to the last stride row).
  std::size_t governing_stride(std::size_t row) const;
  // stride_rows followed by the tail rows, ascending.
  std::vector<std::size_t> full_rows() const;
};

QueryRowSelection select_query_rows(std::size_t n, const DeltaConfig& cfg);

// Dense causal attention restricted to a subset of query rows.
struct RestrictedRows {
  std::vector<std::size_t> rows;  // ascending
  Matrix output;                  // |rows| x d
  std::vector<double> row_normalizers;
  std::vector<std::size_t> computed_entries;
};

RestrictedRows strided_dense_rows(const AttentionProblem& p,
                                  std::span<const std::size_t> rows);

struct DeltaTrace {
  std::vector<std::size_t> selected_rows;  // stride rows, ascending
  Matrix deltas;                           // dense row - sparse row, per stride row
  RestrictedRows dense_rows;               // stride rows plus tail block
  std::size_t tail_start = 0;
  std::size_t n = 0;
  std::size_t gamma = 1;
};

// Expands the per-stride-row correction vectors to one vector per row.
// Repeat copies each delta across its segment; Linear mixes consecutive
// deltas with weights k/gamma (last segment repeats); Ema and AbgFilter run
// a sequential scan over the repeat-expanded stream.
Matrix impute_deltas(const DeltaTrace& trace, std::size_t n,
                     const DeltaConfig& cfg);

struct DeltaOutcome {
  AttentionResult result;
  DeltaTrace trace;
};

// Sparse attention plus the difference-of-outputs correction: every row in
// the corrected prefix gets sparse_row + imputed correction; tail rows are
// dense. computed_entries counts a full row (i+1) at stride and tail rows.
DeltaOutcome delta_attention(const AttentionProblem& p,
                             const SparsityPattern& pattern,
                             const DeltaConfig& cfg);

// Ablation: dense rows are swapped in at stride/tail positions, no
// correction is propagated to the rows in between.
AttentionResult recompute_attention(const AttentionProblem& p,
                                    const SparsityPattern& pattern,
                                    const DeltaConfig& cfg);

}  // namespace attnlab
