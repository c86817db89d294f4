#include "attnlab/workload.hpp"

#include <cmath>

#include "attnlab/rng.hpp"
#include "attnlab/tensorio.hpp"

namespace attnlab {

namespace {

enum Stream : std::uint64_t {
  kQ = 0,
  kK = 1,
  kV = 2,
  kNeedleKeys = 3,
  kNeedleValues = 4,
  kNeedlePositions = 5,
  kNeedleTarget = 6,
};

Matrix gaussian_matrix(std::uint64_t seed, std::size_t head, Stream stream,
                       std::size_t rows, std::size_t cols, double scale) {
  CounterRng rng(seed, head, stream);
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < cols; ++c, ++idx) {
      row[c] = scale * rng.gaussian(idx);
    }
  }
  return m;
}

std::vector<std::size_t> distinct_positions(std::uint64_t seed,
                                            std::size_t head,
                                            std::size_t count,
                                            std::size_t bound) {
  // Partial Fisher-Yates over an implicit identity permutation.
  std::vector<std::size_t> pool(bound);
  for (std::size_t i = 0; i < bound; ++i) pool[i] = i;
  CounterRng rng(seed, head, kNeedlePositions);
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(i, bound - i);
    std::swap(pool[i], pool[j]);
    out[i] = pool[i];
  }
  return out;
}

}  // namespace

GeneratedWorkload generate_workload(const WorkloadSpec& spec,
                                    std::uint64_t seed, std::size_t head,
                                    std::size_t n, std::size_t d) {
  if (n < 2) throw ConfigError("n: must be >= 2");
  if (d < 1) throw ConfigError("d: must be >= 1");

  if (const auto* ext = std::get_if<ExternalWorkload>(&spec)) {
    Matrix q = load_tensor(ext->q_path);
    Matrix k = load_tensor(ext->k_path);
    Matrix v = load_tensor(ext->v_path);
    return GeneratedWorkload{AttentionProblem(std::move(q), std::move(k),
                                              std::move(v)),
                             std::nullopt, std::nullopt};
  }

  const double entry_scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix q = gaussian_matrix(seed, head, kQ, n, d, entry_scale);
  Matrix k = gaussian_matrix(seed, head, kK, n, d, entry_scale);
  Matrix v = gaussian_matrix(seed, head, kV, n, d, entry_scale);

  if (std::holds_alternative<GaussianWorkload>(spec)) {
    return GeneratedWorkload{AttentionProblem(std::move(q), std::move(k),
                                              std::move(v)),
                             std::nullopt, std::nullopt};
  }

  const auto& needle = std::get<NeedleWorkload>(spec);
  if (needle.num_pairs < 1) {
    throw ConfigError("workload.num_pairs: must be >= 1");
  }
  if (!(needle.signal_strength > 0.0)) {
    throw ConfigError("workload.signal_strength: must be > 0");
  }
  if (needle.num_pairs * 2 > n) {
    throw ConfigError("workload.num_pairs: 2*num_pairs exceeds n");
  }

  // Planted pairs are unscaled so the signal dominates the backdrop; they
  // never occupy the final row, which carries the probe query.
  CounterRng key_rng(seed, head, kNeedleKeys);
  CounterRng value_rng(seed, head, kNeedleValues);
  const auto positions =
      distinct_positions(seed, head, needle.num_pairs, n - 1);
  Matrix planted_keys(needle.num_pairs, d);
  Matrix planted_values(needle.num_pairs, d);
  std::size_t idx = 0;
  for (std::size_t pair = 0; pair < needle.num_pairs; ++pair) {
    for (std::size_t c = 0; c < d; ++c, ++idx) {
      planted_keys(pair, c) = key_rng.gaussian(idx);
      planted_values(pair, c) = value_rng.gaussian(idx);
    }
  }
  for (std::size_t pair = 0; pair < needle.num_pairs; ++pair) {
    const std::size_t pos = positions[pair];
    for (std::size_t c = 0; c < d; ++c) {
      k(pos, c) = planted_keys(pair, c);
      v(pos, c) = planted_values(pair, c);
    }
  }

  CounterRng target_rng(seed, head, kNeedleTarget);
  const std::size_t target = target_rng.below(0, needle.num_pairs);
  for (std::size_t c = 0; c < d; ++c) {
    q(n - 1, c) = needle.signal_strength * planted_keys(target, c);
  }

  RowVector truth(planted_values.row(target).begin(),
                  planted_values.row(target).end());
  return GeneratedWorkload{
      AttentionProblem(std::move(q), std::move(k), std::move(v)),
      std::move(truth), positions[target]};
}

}  // namespace attnlab
