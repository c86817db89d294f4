#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attnlab/errors.hpp"

namespace attnlab {

// All internal compute is double precision. A row of scores, probabilities or
// values is a plain vector; masks are byte vectors (0 = excluded).
using RowVector = std::vector<double>;
using MaskRow = std::vector<std::uint8_t>;

// Row-major dense matrix. Entries are validated finite when constructed from
// an explicit data buffer.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Square boolean mask, row-major. Used by explicit sparsity patterns.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  explicit BoolMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t r, std::size_t c) const {
    return bits_[r * n_ + c] != 0;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    bits_[r * n_ + c] = v ? 1 : 0;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Counters for numeric edge cases that are mapped to sentinels instead of
// NaN so that aggregate statistics stay well-defined.
struct WarningCounters {
  std::atomic<std::uint64_t> zero_norm_cosine{0};
  std::atomic<std::uint64_t> degenerate_spearman{0};
  std::atomic<std::uint64_t> empty_locality_bucket{0};

  void reset() {
    zero_norm_cosine = 0;
    degenerate_spearman = 0;
    empty_locality_bucket = 0;
  }
};

WarningCounters& warnings();

struct SoftmaxRow {
  RowVector probs;    // zero where mask is false; sums to 1 over support
  double normalizer;  // sum of exp(score - max_score) over the support
  double max_score;   // max score over the support (stabilizer)
};

Matrix matmul(const Matrix& a, const Matrix& b);

double dot(std::span<const double> u, std::span<const double> v);

// Numerically stable masked softmax over one row. Throws EmptySupportError
// if the mask has no true entry.
SoftmaxRow masked_softmax_row(std::span<const double> scores,
                              std::span<const std::uint8_t> mask);

// Cosine similarity in [-1, 1]. A zero-norm input yields 0.0 and bumps
// warnings().zero_norm_cosine; bitwise-equal nonzero inputs yield exactly 1.
double cosine(std::span<const double> u, std::span<const double> v);

double norm2(std::span<const double> u);

}  // namespace attnlab
