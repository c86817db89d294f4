#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "attnlab/attention.hpp"

namespace attnlab {

// Exact decomposition of the sparse-vs-dense output gap for one attention
// row and one value column. With a shared per-row max stabilizer:
//   unselected_mass  = sum of exp(score) over keys the pattern drops
//   selected_mass    = sum of exp(score) over kept keys
//   delta_value      = dense dot - sparse dot
//   remainder        = sum over kept keys of (dense prob - sparse prob) * v
// and the guarantee |remainder| <= unselected_mass / total_mass * max |v|
// over kept keys.
struct BoundRecord {
  std::size_t row = 0;
  std::size_t value_col = 0;
  double unselected_mass = 0.0;       // H
  double selected_mass = 0.0;         // T
  double selected_abs_max = 0.0;      // max |v| over kept keys
  double delta_value = 0.0;           // dense - sparse contribution
  double unselected_contribution = 0.0;
  double remainder = 0.0;             // direct sum over kept keys
  double closed_form_remainder = 0.0; // -(H/(H+T)) * sparse dot
  double error_bound = 0.0;           // (H/(H+T)) * selected_abs_max
  double empirical_error = 0.0;       // |delta - unselected_contribution|
};

BoundRecord lemma_decompose(const AttentionProblem& p,
                            const SparsityPattern& pattern, std::size_t row,
                            std::size_t value_col);

// Per row, value columns collapsed to the worst case (max |remainder| and
// max bound); per-column records kept when verbose is set.
struct BoundSweep {
  std::string pattern_label;
  std::vector<BoundRecord> rows;        // one per requested row
  std::vector<BoundRecord> per_column;  // only when verbose
};

struct BoundReport {
  std::vector<BoundSweep> sweeps;
};

BoundReport bound_sweep(const AttentionProblem& p,
                        const std::vector<SparsityPattern>& patterns,
                        std::span<const std::size_t> rows,
                        bool verbose_columns = false);

}  // namespace attnlab
