#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "attnlab/linalg.hpp"

namespace attnlab {

// One attention head's projected inputs. N = sequence length, d = head dim.
struct AttentionProblem {
  Matrix q;
  Matrix k;
  Matrix v;
  double scale;  // applied to every q.k score; defaults to 1/sqrt(d)

  AttentionProblem(Matrix q_in, Matrix k_in, Matrix v_in);
  AttentionProblem(Matrix q_in, Matrix k_in, Matrix v_in, double scale_in);

  std::size_t seq_len() const noexcept { return q.rows(); }
  std::size_t head_dim() const noexcept { return q.cols(); }
};

// Always keep the first `sink` keys plus the trailing `window` keys
// (diagonal included) of each causal row.
struct SinkWindow {
  std::size_t sink = 0;
  std::size_t window = 1;
};

// Idealized sparsifier: the k largest pre-softmax scores per row; ties go to
// the larger (more recent) index. Rows shorter than k keep everything.
struct OracleTopK {
  std::size_t k = 1;
};

// Caller-provided lower-triangular mask; every row must keep at least one
// causal key.
struct ExplicitMask {
  BoolMatrix mask;
};

class SparsityPattern {
 public:
  static SparsityPattern sink_window(std::size_t sink, std::size_t window);
  static SparsityPattern oracle_top_k(std::size_t k);
  static SparsityPattern explicit_mask(BoolMatrix mask);
  static SparsityPattern full_causal(std::size_t n);  // lower triangle, no-op mask

  bool needs_scores() const noexcept;

  // Selected key indices (ascending) for causal row `row`. `scores` must
  // cover keys 0..row and is only read by score-dependent patterns.
  std::vector<std::size_t> selected_keys(std::size_t row,
                                         std::span<const double> scores) const;

  // Selected-entry count for row `row`, computable without scores.
  std::size_t selected_count(std::size_t row) const;

  std::string label() const;

  const std::variant<SinkWindow, OracleTopK, ExplicitMask>& kind() const {
    return kind_;
  }

 private:
  explicit SparsityPattern(std::variant<SinkWindow, OracleTopK, ExplicitMask> k)
      : kind_(std::move(k)) {}
  std::variant<SinkWindow, OracleTopK, ExplicitMask> kind_;
};

struct AttentionResult {
  Matrix output;                             // N x d
  std::vector<double> row_normalizers;       // sum exp(s - row support max)
  std::vector<std::size_t> computed_entries; // score entries computed per row
};

// Causal softmax(scale * q k^T) v over the full lower triangle.
AttentionResult dense_attention(const AttentionProblem& p);

// Row-wise attention restricted to the pattern's key set, softmax
// renormalized over that set only.
AttentionResult sparse_attention(const AttentionProblem& p,
                                 const SparsityPattern& pattern);

// Single generation step: dense attention of one new query over the cached
// keys/values plus the new key/value row.
RowVector decode_step(const Matrix& kv_k, const Matrix& kv_v,
                      const RowVector& q_new, const RowVector& k_new,
                      const RowVector& v_new, double scale);

// Pre-softmax scores of row `row` against keys 0..row.
RowVector score_row(const AttentionProblem& p, std::size_t row);

}  // namespace attnlab
