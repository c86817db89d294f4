#include "attnlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace attnlab {

namespace {

void require_finite(const std::vector<double>& data, const char* what) {
  for (double x : data) {
    if (!std::isfinite(x)) {
      throw DimensionError(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace

WarningCounters& warnings() {
  static WarningCounters counters;
  return counters;
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                         " != rows*cols " + std::to_string(rows_ * cols_));
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("dot: length mismatch " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

SoftmaxRow masked_softmax_row(std::span<const double> scores,
                              std::span<const std::uint8_t> mask) {
  if (scores.size() != mask.size()) {
    throw DimensionError("masked_softmax_row: scores/mask length mismatch");
  }
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i] && scores[i] > max_score) max_score = scores[i];
  }
  if (!std::isfinite(max_score)) {
    throw EmptySupportError("masked_softmax_row: mask selects no entry");
  }
  SoftmaxRow out;
  out.max_score = max_score;
  out.probs.assign(scores.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!mask[i]) continue;
    const double w = std::exp(scores[i] - max_score);
    out.probs[i] = w;
    sum += w;
  }
  out.normalizer = sum;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) out.probs[i] /= sum;
  }
  return out;
}

double norm2(std::span<const double> u) {
  double acc = 0.0;
  for (double x : u) acc += x * x;
  return std::sqrt(acc);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine: length mismatch " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  }
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) {
    warnings().zero_norm_cosine.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  // Identical vectors must compare as exactly 1; the quotient below can land
  // one ulp off.
  if (std::equal(u.begin(), u.end(), v.begin())) return 1.0;
  const double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace attnlab
