#include "attnlab/bound.hpp"

#include <algorithm>
#include <cmath>

namespace attnlab {

BoundRecord lemma_decompose(const AttentionProblem& p,
                            const SparsityPattern& pattern, std::size_t row,
                            std::size_t value_col) {
  if (row >= p.seq_len()) {
    throw DimensionError("lemma_decompose: row out of range");
  }
  if (value_col >= p.head_dim()) {
    throw DimensionError("lemma_decompose: value column out of range");
  }
  const RowVector scores = score_row(p, row);
  const auto selected = pattern.selected_keys(row, scores);
  std::vector<std::uint8_t> is_selected(row + 1, 0);
  for (std::size_t j : selected) is_selected[j] = 1;

  // One shared stabilizer over the whole row keeps the H/(H+T) ratio exact.
  double max_score = scores[0];
  for (double s : scores) max_score = std::max(max_score, s);

  double unselected_mass = 0.0;
  double selected_mass = 0.0;
  for (std::size_t j = 0; j <= row; ++j) {
    const double w = std::exp(scores[j] - max_score);
    (is_selected[j] ? selected_mass : unselected_mass) += w;
  }
  const double total_mass = unselected_mass + selected_mass;

  double dense_dot = 0.0;
  double sparse_dot = 0.0;
  double unselected_contribution = 0.0;
  double remainder = 0.0;
  double selected_abs_max = 0.0;
  for (std::size_t j = 0; j <= row; ++j) {
    const double w = std::exp(scores[j] - max_score);
    const double vj = p.v(j, value_col);
    const double dense_prob = w / total_mass;
    dense_dot += dense_prob * vj;
    if (is_selected[j]) {
      const double sparse_prob = w / selected_mass;
      sparse_dot += sparse_prob * vj;
      remainder += (dense_prob - sparse_prob) * vj;
      selected_abs_max = std::max(selected_abs_max, std::abs(vj));
    } else {
      unselected_contribution += dense_prob * vj;
    }
  }

  BoundRecord rec;
  rec.row = row;
  rec.value_col = value_col;
  rec.unselected_mass = unselected_mass;
  rec.selected_mass = selected_mass;
  rec.selected_abs_max = selected_abs_max;
  rec.delta_value = dense_dot - sparse_dot;
  rec.unselected_contribution = unselected_contribution;
  rec.remainder = remainder;
  rec.closed_form_remainder =
      -(unselected_mass / total_mass) * sparse_dot;
  rec.error_bound = (unselected_mass / total_mass) * selected_abs_max;
  rec.empirical_error = std::abs(rec.delta_value - unselected_contribution);
  return rec;
}

BoundReport bound_sweep(const AttentionProblem& p,
                        const std::vector<SparsityPattern>& patterns,
                        std::span<const std::size_t> rows,
                        bool verbose_columns) {
  if (rows.empty()) throw DimensionError("bound_sweep: no rows requested");
  BoundReport report;
  for (const auto& pattern : patterns) {
    BoundSweep sweep;
    sweep.pattern_label = pattern.label();
    for (std::size_t row : rows) {
      BoundRecord worst;
      bool first = true;
      for (std::size_t col = 0; col < p.head_dim(); ++col) {
        BoundRecord rec = lemma_decompose(p, pattern, row, col);
        if (verbose_columns) sweep.per_column.push_back(rec);
        if (first || std::abs(rec.remainder) > std::abs(worst.remainder)) {
          const double prev_bound = first ? 0.0 : worst.error_bound;
          const double prev_err = first ? 0.0 : worst.empirical_error;
          const double prev_max = first ? 0.0 : worst.selected_abs_max;
          worst = rec;
          worst.error_bound = std::max(worst.error_bound, prev_bound);
          worst.empirical_error = std::max(worst.empirical_error, prev_err);
          worst.selected_abs_max = std::max(worst.selected_abs_max, prev_max);
          first = false;
        } else {
          worst.error_bound = std::max(worst.error_bound, rec.error_bound);
          worst.empirical_error =
              std::max(worst.empirical_error, rec.empirical_error);
          worst.selected_abs_max =
              std::max(worst.selected_abs_max, rec.selected_abs_max);
        }
      }
      sweep.rows.push_back(worst);
    }
    report.sweeps.push_back(std::move(sweep));
  }
  return report;
}

}  // namespace attnlab
