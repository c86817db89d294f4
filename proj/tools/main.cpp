#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attnlab/report.hpp"

namespace {

using namespace attnlab;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", opts.out_dir, "report destination directory");
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_flag("--deterministic", opts.deterministic,
                "zero wall-clock timings for reproducible reports");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
  ExperimentConfig cfg =
      opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.deterministic) cfg.deterministic = true;
  validate(cfg);
  return cfg;
}

int cmd_run(const CommonOpts& opts, bool json_only) {
  const ExperimentConfig cfg = resolve_config(opts);
  const RunReport report = run_experiment(cfg);
  write_report(report, opts.out_dir, !json_only);
  std::cout << "wrote " << (std::filesystem::path(opts.out_dir) / "report.json").string()
            << "\n";
  for (const auto& agg : report.aggregates) {
    std::printf("%-10s %-16s mean_cos=%.6f mean_rho=%.6f sparsity=%.6f\n",
                method_name(agg.method).c_str(), agg.pattern_label.c_str(),
                agg.mean_cosine, agg.mean_spearman, agg.cost.sparsity);
  }
  return 0;
}

int cmd_bench(const CommonOpts& opts, std::size_t repeats) {
  const ExperimentConfig cfg = resolve_config(opts);
  const auto rows = bench(cfg, repeats);
  std::cout << render_bench_table(rows);
  std::filesystem::create_directories(opts.out_dir);
  write_bench_csv(rows, std::filesystem::path(opts.out_dir) / "bench.csv");
  return 0;
}

int cmd_bound(const CommonOpts& opts, bool per_column) {
  ExperimentConfig cfg = resolve_config(opts);
  if (!cfg.wants(ReportKind::Bound)) cfg.outputs.push_back(ReportKind::Bound);
  const RunReport report = run_experiment(cfg);
  write_report(report, opts.out_dir, true);
  if (report.bounds) {
    double max_remainder = 0.0, max_bound = 0.0;
    std::size_t violations = 0;
    for (const auto& sweep : report.bounds->sweeps) {
      for (const auto& rec : sweep.rows) {
        max_remainder = std::max(max_remainder, std::abs(rec.remainder));
        max_bound = std::max(max_bound, rec.error_bound);
        if (std::abs(rec.remainder) > rec.error_bound + 1e-12) ++violations;
      }
    }
    std::printf("bound sweep: max |remainder| = %.3e, max bound = %.3e, "
                "violations = %zu\n",
                max_remainder, max_bound, violations);
  }
  if (per_column) {
    // Re-run with per-column records for the verbose table.
    const GeneratedWorkload wl =
        generate_workload(cfg.workload, cfg.seed, 0, cfg.n, cfg.d);
    std::vector<SparsityPattern> patterns;
    for (const auto& spec : cfg.patterns) patterns.push_back(spec.build());
    std::vector<std::size_t> rows;
    const std::size_t n = wl.problem.seq_len();
    const std::size_t count = std::min(cfg.bound_rows, n);
    const std::size_t step = std::max<std::size_t>(1, n / count);
    for (std::size_t r = step - 1; r < n && rows.size() < count; r += step) {
      rows.push_back(r);
    }
    const BoundReport verbose = bound_sweep(wl.problem, patterns, rows, true);
    const auto path = std::filesystem::path(opts.out_dir) / "bound_columns.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("bound: cannot open " + path.string());
    out << "pattern,row,value_col,unselected_mass,selected_mass,"
           "selected_abs_max,remainder,closed_form_remainder,error_bound,"
           "unselected_contribution,empirical_error\n";
    for (const auto& sweep : verbose.sweeps) {
      for (const auto& rec : sweep.per_column) {
        out << sweep.pattern_label << "," << rec.row << "," << rec.value_col
            << "," << format_double(rec.unselected_mass) << ","
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
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<std::size_t>& gammas,
              const std::vector<std::size_t>& windows) {
  const ExperimentConfig cfg = resolve_config(opts);
  const auto rows = sweep_experiment(cfg, gammas, windows);
  std::filesystem::create_directories(opts.out_dir);
  write_sweep_csv(rows, std::filesystem::path(opts.out_dir) / "sweep.csv");
  std::cout << "wrote "
            << (std::filesystem::path(opts.out_dir) / "sweep.csv").string()
            << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for sparse-prefill attention correction"};
  app.require_subcommand(1);

  CommonOpts run_opts, bench_opts, bound_opts, sweep_opts;
  bool json_only = false;
  std::size_t repeats = 5;
  bool per_column = false;
  std::vector<std::size_t> gammas, windows;

  CLI::App* run = app.add_subcommand("run", "run an experiment and emit reports");
  add_common(run, run_opts);
  run->add_flag("--json-only", json_only, "skip the CSV tables");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "CPU micro-benchmark of the configured methods");
  add_common(bench_cmd, bench_opts);
  bench_cmd->add_option("--repeats", repeats, "timing repeats (>= 3)");

  CLI::App* bound_cmd =
      app.add_subcommand("bound", "remainder-bound sweep over rows and patterns");
  add_common(bound_cmd, bound_opts);
  bound_cmd->add_flag("--per-column", per_column,
                      "also emit per-value-column records");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "cartesian gamma x window sweep");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--gammas", gammas, "gamma values")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--windows", windows, "window sizes")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, json_only);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, repeats);
    if (bound_cmd->parsed()) return cmd_bound(bound_opts, per_column);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, gammas, windows);
  } catch (const attnlab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
