#include "attnlab/delta.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace attnlab {

void validate(const DeltaConfig& cfg) {
  if (cfg.gamma < 1) throw ConfigError("delta.gamma: must be >= 1");
  if (const auto* e = std::get_if<Ema>(&cfg.imputation)) {
    if (!(e->beta > 0.0) || e->beta > 1.0 || !std::isfinite(e->beta)) {
      throw ConfigError("delta.imputation.beta: must be in (0, 1]");
    }
  }
  if (const auto* f = std::get_if<AbgFilter>(&cfg.imputation)) {
    if (!std::isfinite(f->alpha) || !std::isfinite(f->beta) ||
        !std::isfinite(f->g)) {
      throw ConfigError("delta.imputation: filter coefficients must be finite");
    }
  }
}

bool QueryRowSelection::is_full_row(std::size_t row) const {
  if (row >= tail_start) return true;
  return row % gamma == 0;
}

std::size_t QueryRowSelection::governing_stride(std::size_t row) const {
  const std::size_t last = stride_rows.back();
  const std::size_t bucket = (row / gamma) * gamma;
  return std::min(bucket, last);
}

std::vector<std::size_t> QueryRowSelection::full_rows() const {
  std::vector<std::size_t> rows = stride_rows;
  for (std::size_t i = tail_start; i < n; ++i) rows.push_back(i);
  return rows;
}

QueryRowSelection select_query_rows(std::size_t n, const DeltaConfig& cfg) {
  validate(cfg);
  if (n < 1) throw DimensionError("select_query_rows: n must be >= 1");
  std::size_t tail = cfg.tail_dense.value_or(n % cfg.gamma);
  if (cfg.tail_dense && *cfg.tail_dense >= n) {
    throw ConfigError("delta.tail_dense: must be < n");
  }
  // gamma > n makes the default tail cover everything; keep row 0 strided so
  // the corrected prefix is never empty.
  tail = std::min(tail, n - 1);

  QueryRowSelection sel;
  sel.n = n;
  sel.gamma = cfg.gamma;
  sel.tail_start = n - tail;
  for (std::size_t r = 0; r < sel.tail_start; r += cfg.gamma) {
    sel.stride_rows.push_back(r);
  }
  return sel;
}

RestrictedRows strided_dense_rows(const AttentionProblem& p,
                                  std::span<const std::size_t> rows) {
  const std::size_t n = p.seq_len();
  RestrictedRows out;
  out.rows.assign(rows.begin(), rows.end());
  out.output = Matrix(rows.size(), p.head_dim());
  out.row_normalizers.resize(rows.size());
  out.computed_entries.resize(rows.size());
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const std::size_t i = rows[idx];
    if (i >= n) {
      throw DimensionError("strided_dense_rows: row " + std::to_string(i) +
                           " out of range");
    }
    const RowVector scores = score_row(p, i);
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    double denom = 0.0;
    auto out_row = out.output.row(idx);
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = std::exp(scores[j] - max_score);
      denom += w;
      const auto vj = p.v.row(j);
      for (std::size_t c = 0; c < out_row.size(); ++c) out_row[c] += w * vj[c];
    }
    for (double& x : out_row) x /= denom;
    out.row_normalizers[idx] = denom;
    out.computed_entries[idx] = i + 1;
  }
  return out;
}

namespace {

// Correction vector stream expanded by repetition: row i reads the delta of
// its governing stride row.
Matrix repeat_stream(const DeltaTrace& trace, std::size_t n) {
  const std::size_t d = trace.deltas.cols();
  Matrix r(n, d);
  const std::size_t m_count = trace.selected_rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = std::min(i / trace.gamma, m_count - 1);
    const auto src = trace.deltas.row(m);
    std::copy(src.begin(), src.end(), r.row(i).begin());
  }
  return r;
}

}  // namespace

Matrix impute_deltas(const DeltaTrace& trace, std::size_t n,
                     const DeltaConfig& cfg) {
  if (trace.selected_rows.empty()) {
    throw EmptySupportError("impute_deltas: no stride rows");
  }
  const std::size_t d = trace.deltas.cols();
  const std::size_t m_count = trace.selected_rows.size();

  if (std::holds_alternative<Repeat>(cfg.imputation)) {
    return repeat_stream(trace, n);
  }

  if (std::holds_alternative<Linear>(cfg.imputation)) {
    Matrix out(n, d);
    const double inv_gamma = 1.0 / static_cast<double>(trace.gamma);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = std::min(i / trace.gamma, m_count - 1);
      auto dst = out.row(i);
      const auto cur = trace.deltas.row(m);
      if (m + 1 < m_count) {
        const double beta =
            static_cast<double>(i - trace.selected_rows[m]) * inv_gamma;
        const auto nxt = trace.deltas.row(m + 1);
        for (std::size_t c = 0; c < d; ++c) {
          dst[c] = (1.0 - beta) * cur[c] + beta * nxt[c];
        }
      } else {
        // Last segment has no successor delta; fall back to repeat.
        std::copy(cur.begin(), cur.end(), dst.begin());
      }
    }
    return out;
  }

  if (const auto* e = std::get_if<Ema>(&cfg.imputation)) {
    Matrix out = repeat_stream(trace, n);
    const double beta = e->beta;
    for (std::size_t i = 1; i < n; ++i) {
      auto prev = out.row(i - 1);
      auto cur = out.row(i);
      for (std::size_t c = 0; c < d; ++c) {
        cur[c] = (1.0 - beta) * prev[c] + beta * cur[c];
      }
    }
    return out;
  }

  const auto& f = std::get<AbgFilter>(cfg.imputation);
  const Matrix stream = repeat_stream(trace, n);
  Matrix out(n, d);
  RowVector pos(stream.row(0).begin(), stream.row(0).end());
  RowVector vel(d, 0.0);
  RowVector acc(d, 0.0);
  std::copy(pos.begin(), pos.end(), out.row(0).begin());
  for (std::size_t i = 1; i < n; ++i) {
    const auto y = stream.row(i);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      const double p_hat = pos[c] + vel[c] + 0.5 * acc[c];
      const double v_hat = vel[c] + acc[c];
      const double resid = y[c] - p_hat;
      pos[c] = p_hat + f.alpha * resid;
      vel[c] = v_hat + f.beta * resid;
      acc[c] = acc[c] + f.g * resid;
      dst[c] = pos[c];
    }
  }
  return out;
}

namespace {

DeltaTrace build_trace(const AttentionProblem& p, const AttentionResult& sparse,
                       const QueryRowSelection& sel) {
  DeltaTrace trace;
  trace.selected_rows = sel.stride_rows;
  trace.tail_start = sel.tail_start;
  trace.n = sel.n;
  trace.gamma = sel.gamma;
  trace.dense_rows = strided_dense_rows(p, sel.full_rows());

  const std::size_t d = p.head_dim();
  trace.deltas = Matrix(sel.stride_rows.size(), d);
  for (std::size_t m = 0; m < sel.stride_rows.size(); ++m) {
    const std::size_t row = sel.stride_rows[m];
    const auto dense_row = trace.dense_rows.output.row(m);
    const auto sparse_row = sparse.output.row(row);
    auto dst = trace.deltas.row(m);
    for (std::size_t c = 0; c < d; ++c) dst[c] = dense_row[c] - sparse_row[c];
  }
  return trace;
}

void fill_bookkeeping(AttentionResult& res, const AttentionResult& sparse,
                      const DeltaTrace& trace) {
  res.row_normalizers = sparse.row_normalizers;
  res.computed_entries = sparse.computed_entries;
  const auto& full = trace.dense_rows;
  for (std::size_t idx = 0; idx < full.rows.size(); ++idx) {
    const std::size_t row = full.rows[idx];
    res.row_normalizers[row] = full.row_normalizers[idx];
    res.computed_entries[row] = row + 1;
  }
}

}  // namespace

DeltaOutcome delta_attention(const AttentionProblem& p,
                             const SparsityPattern& pattern,
                             const DeltaConfig& cfg) {
  const std::size_t n = p.seq_len();
  const QueryRowSelection sel = select_query_rows(n, cfg);
  const AttentionResult sparse = sparse_attention(p, pattern);
  DeltaTrace trace = build_trace(p, sparse, sel);
  const Matrix corrections = impute_deltas(trace, n, cfg);

  DeltaOutcome out;
  out.result.output = Matrix(n, p.head_dim());
  // One arithmetic path for every corrected row, stride rows included, so
  // imputation modes that degenerate to Repeat reproduce it bit for bit.
  for (std::size_t i = 0; i < sel.tail_start; ++i) {
    const auto s = sparse.output.row(i);
    const auto c = corrections.row(i);
    auto dst = out.result.output.row(i);
    for (std::size_t col = 0; col < dst.size(); ++col) {
      dst[col] = s[col] + c[col];
    }
  }
  // Tail rows are exact dense rows.
  const std::size_t tail_offset = sel.stride_rows.size();
  for (std::size_t i = sel.tail_start; i < n; ++i) {
    const auto src =
        trace.dense_rows.output.row(tail_offset + (i - sel.tail_start));
    std::copy(src.begin(), src.end(), out.result.output.row(i).begin());
  }
  fill_bookkeeping(out.result, sparse, trace);
  out.trace = std::move(trace);
  return out;
}

AttentionResult recompute_attention(const AttentionProblem& p,
                                    const SparsityPattern& pattern,
                                    const DeltaConfig& cfg) {
  const std::size_t n = p.seq_len();
  const QueryRowSelection sel = select_query_rows(n, cfg);
  const AttentionResult sparse = sparse_attention(p, pattern);
  const DeltaTrace trace = build_trace(p, sparse, sel);

  AttentionResult res;
  res.output = sparse.output;
  for (std::size_t idx = 0; idx < trace.dense_rows.rows.size(); ++idx) {
    const std::size_t row = trace.dense_rows.rows[idx];
    const auto src = trace.dense_rows.output.row(idx);
    std::copy(src.begin(), src.end(), res.output.row(row).begin());
  }
  fill_bookkeeping(res, sparse, trace);
  return res;
}

}  // namespace attnlab
