#include "attnlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace attnlab {

namespace {

// 1-based fractional ranks; tied values share their average rank.
std::vector<double> average_ranks(const RowVector& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto n = sorted.size();
  const double pos = q * static_cast<double>(n);
  std::size_t idx = pos <= 1.0 ? 0 : static_cast<std::size_t>(std::ceil(pos)) - 1;
  idx = std::min(idx, n - 1);
  return sorted[idx];
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

double spearman_rho(const RowVector& a, const RowVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("spearman_rho: length mismatch");
  }
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  if (ra == rb) {
    // Identical rankings (covers strictly monotone transforms) are exactly 1.
    bool constant = true;
    for (double r : ra) constant = constant && r == ra[0];
    if (!constant) return 1.0;
  }
  const double n = static_cast<double>(ra.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - ma;
    const double db = rb[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) {
    warnings().degenerate_spearman.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return std::clamp(num / std::sqrt(va * vb), -1.0, 1.0);
}

RowVector attention_prob_row(const AttentionProblem& p,
                             const MethodScoreSpec& spec, std::size_t row) {
  const RowVector scores = score_row(p, row);
  const bool dense_row =
      spec.pattern == nullptr ||
      std::binary_search(spec.full_rows.begin(), spec.full_rows.end(), row);
  MaskRow mask(row + 1, 0);
  if (dense_row) {
    std::fill(mask.begin(), mask.end(), 1);
  } else {
    for (std::size_t j : spec.pattern->selected_keys(row, scores)) mask[j] = 1;
  }
  return masked_softmax_row(scores, mask).probs;
}

MethodComparison compare_methods(const AttentionProblem& p,
                                 const AttentionResult& dense,
                                 const AttentionResult& method,
                                 const MethodScoreSpec& spec,
                                 std::size_t suffix_len,
                                 bool exclude_unsupported) {
  const std::size_t n = p.seq_len();
  if (suffix_len > n) {
    throw DimensionError("compare_methods: suffix_len exceeds n");
  }
  MethodComparison cmp;
  cmp.row_cosines.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cmp.row_cosines[i] = cosine(method.output.row(i), dense.output.row(i));
  }

  const MethodScoreSpec dense_spec{};
  for (std::size_t i = n - suffix_len; i < n; ++i) {
    RowVector a = attention_prob_row(p, spec, i);
    RowVector b = attention_prob_row(p, dense_spec, i);
    if (exclude_unsupported && spec.pattern != nullptr) {
      RowVector fa, fb;
      const RowVector scores = score_row(p, i);
      for (std::size_t j : spec.pattern->selected_keys(i, scores)) {
        fa.push_back(a[j]);
        fb.push_back(b[j]);
      }
      a = std::move(fa);
      b = std::move(fb);
    }
    cmp.suffix_rows.push_back(i);
    cmp.suffix_spearman.push_back(spearman_rho(a, b));
  }

  std::vector<double> sorted_cos = cmp.row_cosines;
  std::sort(sorted_cos.begin(), sorted_cos.end());
  cmp.mean_cosine = mean_of(cmp.row_cosines);
  cmp.median_cosine = median_of(cmp.row_cosines);
  cmp.p05_cosine = percentile(sorted_cos, 0.05);
  cmp.p95_cosine = percentile(sorted_cos, 0.95);
  cmp.mean_spearman = mean_of(cmp.suffix_spearman);
  cmp.median_spearman = median_of(cmp.suffix_spearman);
  return cmp;
}

MethodComparison compare_methods(const AttentionProblem& p,
                                 const AttentionResult& method,
                                 std::size_t suffix_len) {
  return compare_methods(p, dense_attention(p), method, MethodScoreSpec{},
                         suffix_len);
}

LocalityProfile delta_locality(const AttentionProblem& p,
                               const SparsityPattern& pattern,
                               std::size_t nu_max) {
  const std::size_t n = p.seq_len();
  if (nu_max >= n) {
    throw DimensionError("delta_locality: nu_max must be < n");
  }
  const AttentionResult dense = dense_attention(p);
  const AttentionResult sparse = sparse_attention(p, pattern);
  Matrix gap(n, p.head_dim());
  std::vector<std::uint8_t> nonzero(n, 0);
  constexpr double kZeroNorm = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = gap.row(i);
    const auto dr = dense.output.row(i);
    const auto sr = sparse.output.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = dr[c] - sr[c];
    nonzero[i] = norm2(dst) > kZeroNorm ? 1 : 0;
  }

  LocalityProfile profile;
  profile.mean_cosine.assign(nu_max + 1, 0.0);
  profile.pairs.assign(nu_max + 1, 0);
  for (std::size_t nu = 0; nu <= nu_max; ++nu) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + nu < n; ++i) {
      if (!nonzero[i] || !nonzero[i + nu]) continue;
      acc += cosine(gap.row(i), gap.row(i + nu));
      ++count;
    }
    profile.pairs[nu] = count;
    if (count > 0) {
      profile.mean_cosine[nu] = acc / static_cast<double>(count);
    } else {
      warnings().empty_locality_bucket.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return profile;
}

CostAccount cost_account(const AttentionResult& result, std::size_t n) {
  return cost_account(result, n, {});
}

CostAccount cost_account(const AttentionResult& result, std::size_t n,
                         std::span<const std::size_t> full_rows) {
  CostAccount acct;
  acct.dense_entries = dense_entry_count(n);
  acct.method_entries = 0;
  for (std::size_t c : result.computed_entries) acct.method_entries += c;
  acct.sparsity = 1.0 - static_cast<double>(acct.method_entries) /
                            static_cast<double>(acct.dense_entries);
  acct.flop_ratio_vs_dense = static_cast<double>(acct.dense_entries) /
                             static_cast<double>(acct.method_entries);
  for (std::size_t row : full_rows) acct.correction_entries += row + 1;
  if (!full_rows.empty()) {
    acct.correction_sparsity =
        1.0 - static_cast<double>(acct.correction_entries) /
                  static_cast<double>(acct.dense_entries);
  }
  return acct;
}

std::size_t dense_entry_count(std::size_t n) { return n * (n + 1) / 2; }

std::size_t sparse_entry_count(const SparsityPattern& pattern, std::size_t n) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += pattern.selected_count(i);
  return total;
}

CostAccount analytic_sparse_cost(const SparsityPattern& pattern,
                                 std::size_t n) {
  CostAccount acct;
  acct.dense_entries = dense_entry_count(n);
  acct.method_entries = sparse_entry_count(pattern, n);
  acct.sparsity = 1.0 - static_cast<double>(acct.method_entries) /
                            static_cast<double>(acct.dense_entries);
  acct.flop_ratio_vs_dense = static_cast<double>(acct.dense_entries) /
                             static_cast<double>(acct.method_entries);
  return acct;
}

CostAccount analytic_delta_cost(const SparsityPattern& pattern, std::size_t n,
                                const DeltaConfig& cfg) {
  const QueryRowSelection sel = select_query_rows(n, cfg);
  CostAccount acct;
  acct.dense_entries = dense_entry_count(n);
  acct.method_entries = sparse_entry_count(pattern, n);
  acct.correction_entries = 0;
  for (std::size_t row : sel.full_rows()) {
    const std::size_t sparse_count = pattern.selected_count(row);
    acct.method_entries += (row + 1) - sparse_count;
    acct.correction_entries += row + 1;
  }
  acct.sparsity = 1.0 - static_cast<double>(acct.method_entries) /
                            static_cast<double>(acct.dense_entries);
  acct.flop_ratio_vs_dense = static_cast<double>(acct.dense_entries) /
                             static_cast<double>(acct.method_entries);
  acct.correction_sparsity =
      1.0 - static_cast<double>(acct.correction_entries) /
                static_cast<double>(acct.dense_entries);
  return acct;
}

std::size_t approx_window_size(std::size_t context, std::size_t window,
                               std::size_t gamma) {
  if (gamma < 1) throw DimensionError("approx_window_size: gamma must be >= 1");
  return window + context / (2 * gamma);
}

}  // namespace attnlab
