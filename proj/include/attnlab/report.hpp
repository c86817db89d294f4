#pragma once

#include <string_view>

#include "attnlab/harness.hpp"

namespace attnlab {

// Fixed CSV header rows, one table per file.
inline constexpr std::string_view kComparisonCsvHeader =
    "head,method,row,cosine,spearman";
inline constexpr std::string_view kCostCsvHeader =
    "head,method,dense_entries,method_entries,sparsity,flop_ratio_vs_dense,"
    "correction_entries,correction_sparsity";
inline constexpr std::string_view kBoundCsvHeader =
    "pattern,row,unselected_mass,selected_mass,selected_abs_max,remainder,"
    "closed_form_remainder,error_bound,unselected_contribution,empirical_error";
inline constexpr std::string_view kNeedleCsvHeader =
    "head,method,needle_score";
inline constexpr std::string_view kTimingsCsvHeader = "head,method,wall_ms";
inline constexpr std::string_view kLocalityCsvHeader = "nu,mean_cosine,pairs";
inline constexpr std::string_view kSummaryCsvHeader =
    "method,pattern,mean_cosine,median_cosine,mean_spearman,median_spearman,"
    "needle_score_mean,sparsity,correction_sparsity";
inline constexpr std::string_view kBenchCsvHeader =
    "method,pattern,median_ms,dense_entries,method_entries,"
    "flop_ratio_vs_dense";
inline constexpr std::string_view kSweepCsvHeader =
    "gamma,window,method,mean_cosine,mean_spearman,sparsity,"
    "correction_sparsity,method_entries";

// Full-precision float -> text (round-trips exactly; up to 17 significant
// digits, locale independent).
std::string format_double(double x);

// Single JSON document: {"config": ..., "results": ...}.
std::string report_to_json(const RunReport& report);

// report.json plus, when the respective output kinds were requested, one CSV
// file per table (comparison.csv, cost.csv, bound.csv, needle.csv,
// timings.csv, locality.csv, summary.csv).
void write_report(const RunReport& report, const std::filesystem::path& out_dir,
                  bool also_csv);

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::filesystem::path& path);

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path);

std::string render_bench_table(const std::vector<BenchRow>& rows);

}  // namespace attnlab
