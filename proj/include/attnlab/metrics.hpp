#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "attnlab/attention.hpp"
#include "attnlab/delta.hpp"

namespace attnlab {

// Spearman rank correlation with average ranks over ties. A constant input
// has no rank variance; that yields 0.0 and bumps
// warnings().degenerate_spearman.
double spearman_rho(const RowVector& a, const RowVector& b);

struct MethodComparison {
  std::vector<double> row_cosines;      // vs the dense output, one per row
  std::vector<std::size_t> suffix_rows; // rows covered by suffix_spearman
  std::vector<double> suffix_spearman;  // rho of score rows, last suffix_len queries
  double mean_cosine = 0.0;
  double median_cosine = 0.0;
  double p05_cosine = 0.0;
  double p95_cosine = 0.0;
  double mean_spearman = 0.0;
  double median_spearman = 0.0;
};

// Where a method's attention-probability rows come from: the pattern's key
// set, except rows listed in full_rows (dense rows swapped in by the delta
// or recompute paths). pattern == nullptr means every row is dense.
struct MethodScoreSpec {
  const SparsityPattern* pattern = nullptr;
  std::vector<std::size_t> full_rows;
};

// Probability row of length row+1: softmax over the method's key set for
// that row, zeros outside it.
RowVector attention_prob_row(const AttentionProblem& p,
                             const MethodScoreSpec& spec, std::size_t row);

MethodComparison compare_methods(const AttentionProblem& p,
                                 const AttentionResult& dense,
                                 const AttentionResult& method,
                                 const MethodScoreSpec& spec,
                                 std::size_t suffix_len,
                                 bool exclude_unsupported = false);

// Convenience form matching the spec surface: dense baseline computed
// internally, method assumed to have dense support.
MethodComparison compare_methods(const AttentionProblem& p,
                                 const AttentionResult& method,
                                 std::size_t suffix_len);

// Mean cosine between exact correction vectors (dense - sparse rows) at lag
// nu, for nu in 0..nu_max. Entries with no valid pair are flagged undefined.
struct LocalityProfile {
  std::vector<double> mean_cosine;   // index = nu
  std::vector<std::size_t> pairs;    // pairs with both rows nonzero
};

LocalityProfile delta_locality(const AttentionProblem& p,
                               const SparsityPattern& pattern,
                               std::size_t nu_max);

struct CostAccount {
  std::size_t dense_entries = 0;   // n(n+1)/2
  std::size_t method_entries = 0;  // distinct score entries the method computes
  double sparsity = 0.0;           // 1 - method_entries/dense_entries
  double flop_ratio_vs_dense = 1.0;  // dense_entries/method_entries (speedup proxy)
  // Strided/tail dense-row cost on its own; this is the extra computation the
  // correction asks for, reported as its own sparsity figure.
  std::size_t correction_entries = 0;
  double correction_sparsity = 1.0;
};

CostAccount cost_account(const AttentionResult& result, std::size_t n);
CostAccount cost_account(const AttentionResult& result, std::size_t n,
                         std::span<const std::size_t> full_rows);

// Entry counts derived from the pattern/config alone; nothing materialized.
std::size_t dense_entry_count(std::size_t n);
std::size_t sparse_entry_count(const SparsityPattern& pattern, std::size_t n);
CostAccount analytic_sparse_cost(const SparsityPattern& pattern, std::size_t n);
CostAccount analytic_delta_cost(const SparsityPattern& pattern, std::size_t n,
                                const DeltaConfig& cfg);

// Effective per-row key budget of the corrected method: window size plus the
// amortized per-row cost of the strided dense rows (integer division).
std::size_t approx_window_size(std::size_t context, std::size_t window,
                               std::size_t gamma);

}  // namespace attnlab
