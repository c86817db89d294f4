#pragma once

#include <optional>
#include <string>
#include <variant>

#include "attnlab/attention.hpp"

namespace attnlab {

// Backdrop sequence: i.i.d. standard-normal Q, K, V scaled by 1/sqrt(d),
// with the usual 1/sqrt(d) score scale on top. The small score spread gives
// smoothly varying attention rows, the regime the correction targets.
struct GaussianWorkload {};

// Gaussian backdrop with `num_pairs` planted (key, value) vector pairs at
// distinct random positions; the planted vectors are unscaled unit-variance
// normals so they stand out of the backdrop. The final query is
// signal_strength times one planted key; retrieval is scored against that
// pair's value row.
struct NeedleWorkload {
  std::size_t num_pairs = 1;
  double signal_strength = 10.0;
};

// Q/K/V imported from tensor files (see tensorio.hpp).
struct ExternalWorkload {
  std::string q_path;
  std::string k_path;
  std::string v_path;
};

using WorkloadSpec =
    std::variant<GaussianWorkload, NeedleWorkload, ExternalWorkload>;

struct GeneratedWorkload {
  AttentionProblem problem;
  // Needle only: the target pair's value row and planted position.
  std::optional<RowVector> needle_truth;
  std::optional<std::size_t> needle_position;
};

// Deterministic per (seed, head); stream-split per tensor so heads and
// tensors are independent and evaluation order is irrelevant.
GeneratedWorkload generate_workload(const WorkloadSpec& spec,
                                    std::uint64_t seed, std::size_t head,
                                    std::size_t n, std::size_t d);

}  // namespace attnlab
