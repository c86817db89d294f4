#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attnlab/bound.hpp"
#include "attnlab/delta.hpp"
#include "attnlab/metrics.hpp"
#include "attnlab/workload.hpp"

namespace attnlab {

enum class Method { Dense, Sparse, Recompute, Delta };

std::string method_name(Method m);

enum class ReportKind { Comparison, Cost, Bound, Locality, Needle, Timings };

// Config-level pattern description. Explicit masks stay a library-level
// feature; configs describe patterns by rule.
struct PatternSpec {
  std::variant<SinkWindow, OracleTopK> kind = SinkWindow{4, 64};

  SparsityPattern build() const;
  std::string label() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t n = 1024;
  std::size_t d = 64;
  std::size_t heads = 4;
  WorkloadSpec workload = GaussianWorkload{};
  std::vector<PatternSpec> patterns = {PatternSpec{}};
  DeltaConfig delta = DeltaConfig{};
  std::vector<Method> methods = {Method::Dense, Method::Sparse,
                                 Method::Recompute, Method::Delta};
  std::size_t suffix_len = 0;  // 0 -> min(128, n)
  std::vector<ReportKind> outputs = {ReportKind::Comparison, ReportKind::Cost};
  bool accounting_only = false;  // entry counts only, nothing materialized
  bool deterministic = false;    // zero all timings
  std::size_t bound_rows = 32;
  std::size_t locality_nu_max = 0;  // 0 -> min(2*gamma, n-1)

  std::size_t effective_suffix_len() const;
  std::size_t effective_locality_nu_max() const;
  bool wants(ReportKind k) const;
};

void validate(const ExperimentConfig& cfg);

// JSON round trip. Parsing validates and reports errors with field paths.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct MethodRunSummary {
  Method method = Method::Dense;
  std::string pattern_label = "-";
  MethodComparison comparison;
  CostAccount cost;
  std::optional<double> needle_score;
  double wall_ms = 0.0;
};

struct HeadReport {
  std::size_t head = 0;
  std::vector<MethodRunSummary> methods;
};

struct AggregateSummary {
  Method method = Method::Dense;
  std::string pattern_label = "-";
  double mean_cosine = 0.0;
  double median_cosine = 0.0;
  double mean_spearman = 0.0;
  double median_spearman = 0.0;
  std::optional<double> needle_score_mean;
  CostAccount cost;  // identical across heads; pattern counts are score-free
  double wall_ms_median = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<HeadReport> heads;
  std::vector<AggregateSummary> aggregates;
  std::optional<BoundReport> bounds;
  std::optional<LocalityProfile> locality;
  std::uint64_t warn_zero_norm_cosine = 0;
  std::uint64_t warn_degenerate_spearman = 0;
  std::uint64_t warn_empty_locality = 0;
};

RunReport run_experiment(const ExperimentConfig& cfg);

struct BenchRow {
  Method method = Method::Dense;
  std::string pattern_label = "-";
  double median_ms = 0.0;
  CostAccount cost;
};

std::vector<BenchRow> bench(const ExperimentConfig& cfg, std::size_t repeats);

struct SweepRow {
  std::size_t gamma = 0;
  std::size_t window = 0;
  Method method = Method::Dense;
  double mean_cosine = 0.0;
  double mean_spearman = 0.0;
  CostAccount cost;
};

std::vector<SweepRow> sweep_experiment(const ExperimentConfig& base,
                                       const std::vector<std::size_t>& gammas,
                                       const std::vector<std::size_t>& windows);

}  // namespace attnlab
