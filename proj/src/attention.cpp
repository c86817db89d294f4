#include "attnlab/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace attnlab {

namespace {

void validate_problem(const AttentionProblem& p) {
  if (p.q.rows() == 0 || p.q.cols() == 0) {
    throw DimensionError("AttentionProblem: N and d must be >= 1");
  }
  if (p.k.rows() != p.q.rows() || p.v.rows() != p.q.rows() ||
      p.k.cols() != p.q.cols() || p.v.cols() != p.q.cols()) {
    throw DimensionError("AttentionProblem: q, k, v must share N x d");
  }
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
    throw DimensionError("AttentionProblem: scale must be positive and finite");
  }
}

}  // namespace

AttentionProblem::AttentionProblem(Matrix q_in, Matrix k_in, Matrix v_in)
    : q(std::move(q_in)), k(std::move(k_in)), v(std::move(v_in)), scale(1.0) {
  if (q.cols() > 0) scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  validate_problem(*this);
}

AttentionProblem::AttentionProblem(Matrix q_in, Matrix k_in, Matrix v_in,
                                   double scale_in)
    : q(std::move(q_in)), k(std::move(k_in)), v(std::move(v_in)),
      scale(scale_in) {
  validate_problem(*this);
}

SparsityPattern SparsityPattern::sink_window(std::size_t sink,
                                             std::size_t window) {
  if (window < 1) throw DimensionError("SinkWindow: window must be >= 1");
  return SparsityPattern(SinkWindow{sink, window});
}

SparsityPattern SparsityPattern::oracle_top_k(std::size_t k) {
  if (k < 1) throw DimensionError("OracleTopK: k must be >= 1");
  return SparsityPattern(OracleTopK{k});
}

SparsityPattern SparsityPattern::explicit_mask(BoolMatrix mask) {
  const std::size_t n = mask.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > i && mask(i, j)) {
        throw DimensionError("ExplicitMask: entry above the diagonal at row " +
                             std::to_string(i));
      }
      any = any || (j <= i && mask(i, j));
    }
    if (!any) {
      throw EmptySupportError("ExplicitMask: row " + std::to_string(i) +
                              " keeps no causal key");
    }
  }
  return SparsityPattern(ExplicitMask{std::move(mask)});
}

SparsityPattern SparsityPattern::full_causal(std::size_t n) {
  BoolMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  }
  return explicit_mask(std::move(m));
}

bool SparsityPattern::needs_scores() const noexcept {
  return std::holds_alternative<OracleTopK>(kind_);
}

std::vector<std::size_t> SparsityPattern::selected_keys(
    std::size_t row, std::span<const double> scores) const {
  const std::size_t len = row + 1;
  std::vector<std::size_t> keys;
  if (const auto* sw = std::get_if<SinkWindow>(&kind_)) {
    const std::size_t win_lo = len > sw->window ? len - sw->window : 0;
    const std::size_t sink_hi = std::min(sw->sink, win_lo);
    keys.reserve(sink_hi + (len - win_lo));
    for (std::size_t j = 0; j < sink_hi; ++j) keys.push_back(j);
    for (std::size_t j = win_lo; j < len; ++j) keys.push_back(j);
    return keys;
  }
  if (const auto* tk = std::get_if<OracleTopK>(&kind_)) {
    if (scores.size() < len) {
      throw DimensionError("selected_keys: scores shorter than row+1");
    }
    const std::size_t take = std::min(tk->k, len);
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), 0);
    // Larger score first; equal scores prefer the more recent key.
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        return a > b;
                      });
    keys.assign(order.begin(), order.begin() + take);
    std::sort(keys.begin(), keys.end());
    return keys;
  }
  const auto& em = std::get<ExplicitMask>(kind_);
  if (row >= em.mask.size()) {
    throw DimensionError("selected_keys: row beyond explicit mask");
  }
  for (std::size_t j = 0; j < len; ++j) {
    if (em.mask(row, j)) keys.push_back(j);
  }
  return keys;
}

std::size_t SparsityPattern::selected_count(std::size_t row) const {
  const std::size_t len = row + 1;
  if (const auto* sw = std::get_if<SinkWindow>(&kind_)) {
    const std::size_t win = std::min(sw->window, len);
    const std::size_t win_lo = len - win;
    return win + std::min(sw->sink, win_lo);
  }
  if (const auto* tk = std::get_if<OracleTopK>(&kind_)) {
    return std::min(tk->k, len);
  }
  const auto& em = std::get<ExplicitMask>(kind_);
  std::size_t c = 0;
  for (std::size_t j = 0; j < len; ++j) c += em.mask(row, j) ? 1 : 0;
  return c;
}

std::string SparsityPattern::label() const {
  if (const auto* sw = std::get_if<SinkWindow>(&kind_)) {
    return "sink" + std::to_string(sw->sink) + "_win" + std::to_string(sw->window);
  }
  if (const auto* tk = std::get_if<OracleTopK>(&kind_)) {
    return "topk" + std::to_string(tk->k);
  }
  return "explicit";
}

RowVector score_row(const AttentionProblem& p, std::size_t row) {
  if (row >= p.seq_len()) throw DimensionError("score_row: row out of range");
  RowVector s(row + 1);
  const auto qi = p.q.row(row);
  for (std::size_t j = 0; j <= row; ++j) {
    s[j] = p.scale * dot(qi, p.k.row(j));
  }
  return s;
}

namespace {

// Softmax over `keys` (a subset of 0..row) and value mix into out_row.
double accumulate_row(const AttentionProblem& p, std::span<const double> scores,
                      std::span<const std::size_t> keys,
                      std::span<double> out_row) {
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j : keys) max_score = std::max(max_score, scores[j]);
  double denom = 0.0;
  std::ranges::fill(out_row, 0.0);
  for (std::size_t j : keys) {
    const double w = std::exp(scores[j] - max_score);
    denom += w;
    const auto vj = p.v.row(j);
    for (std::size_t c = 0; c < out_row.size(); ++c) out_row[c] += w * vj[c];
  }
  const double inv = 1.0 / denom;
  for (double& x : out_row) x *= inv;
  return denom;
}

}  // namespace

AttentionResult dense_attention(const AttentionProblem& p) {
  validate_problem(p);
  const std::size_t n = p.seq_len();
  AttentionResult res;
  res.output = Matrix(n, p.head_dim());
  res.row_normalizers.resize(n);
  res.computed_entries.resize(n);
  std::vector<std::size_t> keys;
  for (std::size_t i = 0; i < n; ++i) {
    const RowVector scores = score_row(p, i);
    keys.resize(i + 1);
    std::iota(keys.begin(), keys.end(), 0);
    res.row_normalizers[i] = accumulate_row(p, scores, keys, res.output.row(i));
    res.computed_entries[i] = i + 1;
  }
  return res;
}

AttentionResult sparse_attention(const AttentionProblem& p,
                                 const SparsityPattern& pattern) {
  validate_problem(p);
  const std::size_t n = p.seq_len();
  AttentionResult res;
  res.output = Matrix(n, p.head_dim());
  res.row_normalizers.resize(n);
  res.computed_entries.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RowVector scores = score_row(p, i);
    const auto keys = pattern.selected_keys(i, scores);
    if (keys.empty()) {
      throw EmptySupportError("sparse_attention: empty key set at row " +
                              std::to_string(i));
    }
    res.row_normalizers[i] = accumulate_row(p, scores, keys, res.output.row(i));
    res.computed_entries[i] = keys.size();
  }
  return res;
}

RowVector decode_step(const Matrix& kv_k, const Matrix& kv_v,
                      const RowVector& q_new, const RowVector& k_new,
                      const RowVector& v_new, double scale) {
  const std::size_t d = q_new.size();
  if (k_new.size() != d || v_new.size() != d) {
    throw DimensionError("decode_step: new rows must share d");
  }
  if (kv_k.rows() != kv_v.rows()) {
    throw DimensionError("decode_step: cache key/value row counts differ");
  }
  if (kv_k.rows() > 0 && (kv_k.cols() != d || kv_v.cols() != d)) {
    throw DimensionError("decode_step: cache width must match d");
  }
  const std::size_t n_cached = kv_k.rows();

  RowVector scores(n_cached + 1);
  for (std::size_t j = 0; j < n_cached; ++j) {
    scores[j] = scale * dot(std::span<const double>(q_new), kv_k.row(j));
  }
  scores[n_cached] = scale * dot(std::span<const double>(q_new),
                                 std::span<const double>(k_new));

  double max_score = *std::max_element(scores.begin(), scores.end());
  double denom = 0.0;
  RowVector out(d, 0.0);
  for (std::size_t j = 0; j <= n_cached; ++j) {
    const double w = std::exp(scores[j] - max_score);
    denom += w;
    const std::span<const double> vj =
        j < n_cached ? kv_v.row(j) : std::span<const double>(v_new);
    for (std::size_t c = 0; c < d; ++c) out[c] += w * vj[c];
  }
  for (double& x : out) x /= denom;
  return out;
}

}  // namespace attnlab
