#include "attnlab/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace attnlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string method_label(Method m, const std::string& pattern) {
  std::string label = method_name(m);
  if (m != Method::Dense && !pattern.empty() && pattern != "-") {
    label += ":" + pattern;
  }
  return label;
}

ordered_json cost_to_json(const CostAccount& c) {
  ordered_json j;
  j["dense_entries"] = c.dense_entries;
  j["method_entries"] = c.method_entries;
  j["sparsity"] = c.sparsity;
  j["flop_ratio_vs_dense"] = c.flop_ratio_vs_dense;
  j["correction_entries"] = c.correction_entries;
  j["correction_sparsity"] = c.correction_sparsity;
  return j;
}

ordered_json summary_to_json(const MethodRunSummary& s, bool with_comparison) {
  ordered_json j;
  j["method"] = method_name(s.method);
  j["pattern"] = s.pattern_label;
  if (with_comparison) {
    j["mean_cosine"] = s.comparison.mean_cosine;
    j["median_cosine"] = s.comparison.median_cosine;
    j["p05_cosine"] = s.comparison.p05_cosine;
    j["p95_cosine"] = s.comparison.p95_cosine;
    j["mean_spearman"] = s.comparison.mean_spearman;
    j["median_spearman"] = s.comparison.median_spearman;
  }
  j["cost"] = cost_to_json(s.cost);
  if (s.needle_score) {
    j["needle_score"] = *s.needle_score;
  } else {
    j["needle_score"] = nullptr;
  }
  j["wall_ms"] = s.wall_ms;
  return j;
}

ordered_json bound_to_json(const BoundReport& report) {
  ordered_json j = ordered_json::array();
  for (const auto& sweep : report.sweeps) {
    ordered_json sj;
    sj["pattern"] = sweep.pattern_label;
    sj["rows"] = ordered_json::array();
    for (const auto& rec : sweep.rows) {
      ordered_json rj;
      rj["row"] = rec.row;
      rj["unselected_mass"] = rec.unselected_mass;
      rj["selected_mass"] = rec.selected_mass;
      rj["selected_abs_max"] = rec.selected_abs_max;
      rj["remainder"] = rec.remainder;
      rj["closed_form_remainder"] = rec.closed_form_remainder;
      rj["error_bound"] = rec.error_bound;
      rj["unselected_contribution"] = rec.unselected_contribution;
      rj["empirical_error"] = rec.empirical_error;
      sj["rows"].push_back(std::move(rj));
    }
    j.push_back(std::move(sj));
  }
  return j;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string report_to_json(const RunReport& report) {
  ordered_json doc;
  doc["config"] = ordered_json::parse(config_to_json(report.config));

  ordered_json results;
  const bool with_comparison =
      !report.config.accounting_only && report.config.wants(ReportKind::Comparison);

  results["aggregates"] = ordered_json::array();
  for (const auto& agg : report.aggregates) {
    ordered_json aj;
    aj["method"] = method_name(agg.method);
    aj["pattern"] = agg.pattern_label;
    if (with_comparison) {
      aj["mean_cosine"] = agg.mean_cosine;
      aj["median_cosine"] = agg.median_cosine;
      aj["mean_spearman"] = agg.mean_spearman;
      aj["median_spearman"] = agg.median_spearman;
    }
    if (agg.needle_score_mean) {
      aj["needle_score_mean"] = *agg.needle_score_mean;
    } else {
      aj["needle_score_mean"] = nullptr;
    }
    aj["cost"] = cost_to_json(agg.cost);
    aj["wall_ms_median"] = agg.wall_ms_median;
    results["aggregates"].push_back(std::move(aj));
  }

  results["heads"] = ordered_json::array();
  for (const auto& hr : report.heads) {
    ordered_json hj;
    hj["head"] = hr.head;
    hj["methods"] = ordered_json::array();
    for (const auto& s : hr.methods) {
      hj["methods"].push_back(summary_to_json(s, with_comparison));
    }
    results["heads"].push_back(std::move(hj));
  }

  if (report.bounds) {
    results["bounds"] = bound_to_json(*report.bounds);
  } else {
    results["bounds"] = nullptr;
  }

  if (report.locality) {
    ordered_json lj;
    lj["mean_cosine"] = ordered_json::array();
    lj["pairs"] = ordered_json::array();
    for (std::size_t nu = 0; nu < report.locality->mean_cosine.size(); ++nu) {
      if (report.locality->pairs[nu] == 0) {
        lj["mean_cosine"].push_back(nullptr);  // undefined bucket
      } else {
        lj["mean_cosine"].push_back(report.locality->mean_cosine[nu]);
      }
      lj["pairs"].push_back(report.locality->pairs[nu]);
    }
    results["locality"] = std::move(lj);
  } else {
    results["locality"] = nullptr;
  }

  ordered_json wj;
  wj["zero_norm_cosine"] = report.warn_zero_norm_cosine;
  wj["degenerate_spearman"] = report.warn_degenerate_spearman;
  wj["empty_locality_bucket"] = report.warn_empty_locality;
  results["warnings"] = std::move(wj);

  doc["results"] = std::move(results);
  return doc.dump(2) + "\n";
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_report: cannot open " + path.string());
  return out;
}

void write_comparison_csv(const RunReport& report,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kComparisonCsvHeader << "\n";
  for (const auto& hr : report.heads) {
    for (const auto& s : hr.methods) {
      const auto& cmp = s.comparison;
      const std::string label = method_label(s.method, s.pattern_label);
      // Spearman is defined on the suffix rows only; blank elsewhere.
      std::size_t suffix_at = 0;
      for (std::size_t row = 0; row < cmp.row_cosines.size(); ++row) {
        out << hr.head << "," << label << "," << row << ","
            << format_double(cmp.row_cosines[row]) << ",";
        if (suffix_at < cmp.suffix_rows.size() &&
            cmp.suffix_rows[suffix_at] == row) {
          out << format_double(cmp.suffix_spearman[suffix_at]);
          ++suffix_at;
        }
        out << "\n";
      }
    }
  }
}

void write_cost_csv(const RunReport& report,
                    const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kCostCsvHeader << "\n";
  if (report.config.accounting_only) {
    for (const auto& agg : report.aggregates) {
      out << 0 << "," << method_label(agg.method, agg.pattern_label) << ","
          << agg.cost.dense_entries << "," << agg.cost.method_entries << ","
          << format_double(agg.cost.sparsity) << ","
          << format_double(agg.cost.flop_ratio_vs_dense) << ","
          << agg.cost.correction_entries << ","
          << format_double(agg.cost.correction_sparsity) << "\n";
    }
    return;
  }
  for (const auto& hr : report.heads) {
    for (const auto& s : hr.methods) {
      out << hr.head << "," << method_label(s.method, s.pattern_label) << ","
          << s.cost.dense_entries << "," << s.cost.method_entries << ","
          << format_double(s.cost.sparsity) << ","
          << format_double(s.cost.flop_ratio_vs_dense) << ","
          << s.cost.correction_entries << ","
          << format_double(s.cost.correction_sparsity) << "\n";
    }
  }
}

void write_bound_csv(const RunReport& report,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kBoundCsvHeader << "\n";
  if (!report.bounds) return;
  for (const auto& sweep : report.bounds->sweeps) {
    for (const auto& rec : sweep.rows) {
      out << sweep.pattern_label << "," << rec.row << ","
          << format_double(rec.unselected_mass) << ","
          << format_double(rec.selected_mass) << ","
          << format_double(rec.selected_abs_max) << ","
          << format_double(rec.remainder) << ","
          << format_double(rec.closed_form_remainder) << ","
          << format_double(rec.error_bound) << ","
          << format_double(rec.unselected_contribution) << ","
          << format_double(rec.empirical_error) << "\n";
    }
  }
}

void write_needle_csv(const RunReport& report,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kNeedleCsvHeader << "\n";
  for (const auto& hr : report.heads) {
    for (const auto& s : hr.methods) {
      if (!s.needle_score) continue;
      out << hr.head << "," << method_label(s.method, s.pattern_label) << ","
          << format_double(*s.needle_score) << "\n";
    }
  }
}

void write_timings_csv(const RunReport& report,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kTimingsCsvHeader << "\n";
  for (const auto& hr : report.heads) {
    for (const auto& s : hr.methods) {
      out << hr.head << "," << method_label(s.method, s.pattern_label) << ","
          << format_double(s.wall_ms) << "\n";
    }
  }
}

void write_locality_csv(const RunReport& report,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kLocalityCsvHeader << "\n";
  if (!report.locality) return;
  for (std::size_t nu = 0; nu < report.locality->mean_cosine.size(); ++nu) {
    out << nu << ",";
    if (report.locality->pairs[nu] > 0) {
      out << format_double(report.locality->mean_cosine[nu]);
    }
    out << "," << report.locality->pairs[nu] << "\n";
  }
}

void write_summary_csv(const RunReport& report,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kSummaryCsvHeader << "\n";
  for (const auto& agg : report.aggregates) {
    out << method_name(agg.method) << "," << agg.pattern_label << ","
        << format_double(agg.mean_cosine) << ","
        << format_double(agg.median_cosine) << ","
        << format_double(agg.mean_spearman) << ","
        << format_double(agg.median_spearman) << ",";
    if (agg.needle_score_mean) out << format_double(*agg.needle_score_mean);
    out << "," << format_double(agg.cost.sparsity) << ","
        << format_double(agg.cost.correction_sparsity) << "\n";
  }
}

}  // namespace

void write_report(const RunReport& report, const std::filesystem::path& out_dir,
                  bool also_csv) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("write_report: cannot create " + out_dir.string() + ": " +
                  ec.message());
  }
  {
    auto out = open_out(out_dir / "report.json");
    out << report_to_json(report);
    if (!out) throw IoError("write_report: write failed for report.json");
  }
  if (!also_csv) return;
  const auto& cfg = report.config;
  if (cfg.wants(ReportKind::Comparison) && !cfg.accounting_only) {
    write_comparison_csv(report, out_dir / "comparison.csv");
  }
  if (cfg.wants(ReportKind::Cost)) {
    write_cost_csv(report, out_dir / "cost.csv");
  }
  if (cfg.wants(ReportKind::Bound)) {
    write_bound_csv(report, out_dir / "bound.csv");
  }
  if (cfg.wants(ReportKind::Needle)) {
    write_needle_csv(report, out_dir / "needle.csv");
  }
  if (cfg.wants(ReportKind::Timings)) {
    write_timings_csv(report, out_dir / "timings.csv");
  }
  if (cfg.wants(ReportKind::Locality)) {
    write_locality_csv(report, out_dir / "locality.csv");
  }
  write_summary_csv(report, out_dir / "summary.csv");
}

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kBenchCsvHeader << "\n";
  for (const auto& row : rows) {
    out << method_name(row.method) << "," << row.pattern_label << ","
        << format_double(row.median_ms) << "," << row.cost.dense_entries << ","
        << row.cost.method_entries << ","
        << format_double(row.cost.flop_ratio_vs_dense) << "\n";
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kSweepCsvHeader << "\n";
  for (const auto& row : rows) {
    out << row.gamma << "," << row.window << "," << method_name(row.method)
        << "," << format_double(row.mean_cosine) << ","
        << format_double(row.mean_spearman) << ","
        << format_double(row.cost.sparsity) << ","
        << format_double(row.cost.correction_sparsity) << ","
        << row.cost.method_entries << "\n";
  }
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "method            pattern           median_ms     entries"
         "      dense/method\n";
  for (const auto& row : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-17s %-17s %10.3f %12zu %13.2f\n",
                  method_name(row.method).c_str(), row.pattern_label.c_str(),
                  row.median_ms, row.cost.method_entries,
                  row.cost.flop_ratio_vs_dense);
    out << line;
  }
  return out.str();
}

}  // namespace attnlab
