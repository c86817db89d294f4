#include "attnlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace attnlab {

namespace {

using nlohmann::json;

double median_inplace(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean_inplace(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Dense: return "dense";
    case Method::Sparse: return "sparse";
    case Method::Recompute: return "recompute";
    case Method::Delta: return "delta";
  }
  return "?";
}

SparsityPattern PatternSpec::build() const {
  if (const auto* sw = std::get_if<SinkWindow>(&kind)) {
    return SparsityPattern::sink_window(sw->sink, sw->window);
  }
  return SparsityPattern::oracle_top_k(std::get<OracleTopK>(kind).k);
}

std::string PatternSpec::label() const { return build().label(); }

std::size_t ExperimentConfig::effective_suffix_len() const {
  return suffix_len == 0 ? std::min<std::size_t>(128, n) : suffix_len;
}

std::size_t ExperimentConfig::effective_locality_nu_max() const {
  if (locality_nu_max != 0) return locality_nu_max;
  return std::min(2 * delta.gamma, n - 1);
}

bool ExperimentConfig::wants(ReportKind k) const {
  return std::find(outputs.begin(), outputs.end(), k) != outputs.end();
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("n: must be >= 2");
  if (cfg.d < 1) throw ConfigError("d: must be >= 1");
  if (cfg.heads < 1) throw ConfigError("heads: must be >= 1");
  if (const auto* needle = std::get_if<NeedleWorkload>(&cfg.workload)) {
    if (needle->num_pairs < 1) {
      throw ConfigError("workload.num_pairs: must be >= 1");
    }
    if (!(needle->signal_strength > 0.0) ||
        !std::isfinite(needle->signal_strength)) {
      throw ConfigError("workload.signal_strength: must be > 0");
    }
    if (needle->num_pairs * 2 > cfg.n) {
      throw ConfigError("workload.num_pairs: 2*num_pairs exceeds n");
    }
  }
  validate(cfg.delta);
  if (cfg.delta.tail_dense && *cfg.delta.tail_dense >= cfg.n) {
    throw ConfigError("delta.tail_dense: must be < n");
  }
  if (cfg.suffix_len > cfg.n) throw ConfigError("suffix_len: exceeds n");
  const bool needs_pattern =
      std::any_of(cfg.methods.begin(), cfg.methods.end(),
                  [](Method m) { return m != Method::Dense; });
  if (needs_pattern && cfg.patterns.empty()) {
    throw ConfigError("patterns: required by the configured sparse methods");
  }
  for (std::size_t i = 0; i < cfg.patterns.size(); ++i) {
    if (const auto* sw = std::get_if<SinkWindow>(&cfg.patterns[i].kind)) {
      if (sw->window < 1) {
        throw ConfigError("patterns[" + std::to_string(i) +
                          "].window: must be >= 1");
      }
    } else if (std::get<OracleTopK>(cfg.patterns[i].kind).k < 1) {
      throw ConfigError("patterns[" + std::to_string(i) + "].k: must be >= 1");
    }
  }
  if (cfg.bound_rows < 1) throw ConfigError("bound_rows: must be >= 1");
  if (cfg.locality_nu_max >= cfg.n) {
    throw ConfigError("locality_nu_max: must be < n");
  }
  if (cfg.accounting_only &&
      std::holds_alternative<ExternalWorkload>(cfg.workload)) {
    throw ConfigError("accounting_only: incompatible with external workload");
  }
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

void expect_keys(const json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* k) { return item.key() == k; });
    if (!ok) config_fail(path.empty() ? item.key() : path + "." + item.key(),
                         "unknown field");
  }
}

std::uint64_t read_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) config_fail(path, "must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

double read_double(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "must be a number");
  return j.get<double>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "must be a string");
  return j.get<std::string>();
}

WorkloadSpec parse_workload(const json& j) {
  if (!j.is_object()) config_fail("workload", "must be an object");
  if (!j.contains("kind")) config_fail("workload.kind", "required");
  const std::string kind = read_string(j["kind"], "workload.kind");
  if (kind == "gaussian") {
    expect_keys(j, "workload", {"kind"});
    return GaussianWorkload{};
  }
  if (kind == "needle") {
    expect_keys(j, "workload", {"kind", "num_pairs", "signal_strength"});
    NeedleWorkload w;
    if (j.contains("num_pairs")) {
      w.num_pairs = read_u64(j["num_pairs"], "workload.num_pairs");
    }
    if (j.contains("signal_strength")) {
      w.signal_strength =
          read_double(j["signal_strength"], "workload.signal_strength");
    }
    return w;
  }
  if (kind == "external") {
    expect_keys(j, "workload", {"kind", "q", "k", "v"});
    ExternalWorkload w;
    for (const char* key : {"q", "k", "v"}) {
      if (!j.contains(key)) {
        config_fail(std::string("workload.") + key, "required for external");
      }
    }
    w.q_path = read_string(j["q"], "workload.q");
    w.k_path = read_string(j["k"], "workload.k");
    w.v_path = read_string(j["v"], "workload.v");
    return w;
  }
  config_fail("workload.kind", "must be gaussian, needle or external");
}

PatternSpec parse_pattern(const json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "must be an object");
  if (!j.contains("kind")) config_fail(path + ".kind", "required");
  const std::string kind = read_string(j["kind"], path + ".kind");
  PatternSpec spec;
  if (kind == "sink_window") {
    expect_keys(j, path, {"kind", "sink", "window"});
    SinkWindow sw;
    if (j.contains("sink")) sw.sink = read_u64(j["sink"], path + ".sink");
    if (j.contains("window")) sw.window = read_u64(j["window"], path + ".window");
    spec.kind = sw;
    return spec;
  }
  if (kind == "oracle_top_k") {
    expect_keys(j, path, {"kind", "k"});
    OracleTopK tk;
    if (j.contains("k")) tk.k = read_u64(j["k"], path + ".k");
    spec.kind = tk;
    return spec;
  }
  config_fail(path + ".kind", "must be sink_window or oracle_top_k");
}

Imputation parse_imputation(const json& j) {
  if (!j.is_object()) config_fail("delta.imputation", "must be an object");
  if (!j.contains("kind")) config_fail("delta.imputation.kind", "required");
  const std::string kind = read_string(j["kind"], "delta.imputation.kind");
  if (kind == "repeat") {
    expect_keys(j, "delta.imputation", {"kind"});
    return Repeat{};
  }
  if (kind == "linear") {
    expect_keys(j, "delta.imputation", {"kind"});
    return Linear{};
  }
  if (kind == "ema") {
    expect_keys(j, "delta.imputation", {"kind", "beta"});
    Ema e;
    if (j.contains("beta")) e.beta = read_double(j["beta"], "delta.imputation.beta");
    return e;
  }
  if (kind == "abg") {
    expect_keys(j, "delta.imputation", {"kind", "alpha", "beta", "g"});
    AbgFilter f;
    if (j.contains("alpha")) f.alpha = read_double(j["alpha"], "delta.imputation.alpha");
    if (j.contains("beta")) f.beta = read_double(j["beta"], "delta.imputation.beta");
    if (j.contains("g")) f.g = read_double(j["g"], "delta.imputation.g");
    return f;
  }
  config_fail("delta.imputation.kind", "must be repeat, linear, ema or abg");
}

DeltaConfig parse_delta(const json& j) {
  if (!j.is_object()) config_fail("delta", "must be an object");
  expect_keys(j, "delta", {"gamma", "tail_dense", "imputation"});
  DeltaConfig cfg;
  if (j.contains("gamma")) cfg.gamma = read_u64(j["gamma"], "delta.gamma");
  if (j.contains("tail_dense") && !j["tail_dense"].is_null()) {
    cfg.tail_dense = read_u64(j["tail_dense"], "delta.tail_dense");
  }
  if (j.contains("imputation")) cfg.imputation = parse_imputation(j["imputation"]);
  return cfg;
}

Method parse_method(const json& j, const std::string& path) {
  const std::string name = read_string(j, path);
  if (name == "dense") return Method::Dense;
  if (name == "sparse") return Method::Sparse;
  if (name == "recompute") return Method::Recompute;
  if (name == "delta") return Method::Delta;
  config_fail(path, "must be dense, sparse, recompute or delta");
}

ReportKind parse_output(const json& j, const std::string& path) {
  const std::string name = read_string(j, path);
  if (name == "comparison") return ReportKind::Comparison;
  if (name == "cost") return ReportKind::Cost;
  if (name == "bound") return ReportKind::Bound;
  if (name == "locality") return ReportKind::Locality;
  if (name == "needle") return ReportKind::Needle;
  if (name == "timings") return ReportKind::Timings;
  config_fail(path, "must be comparison, cost, bound, locality, needle or timings");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: must be a JSON object");
  expect_keys(j, "",
              {"seed", "n", "d", "heads", "workload", "patterns", "delta",
               "methods", "suffix_len", "outputs", "accounting_only",
               "deterministic", "bound_rows", "locality_nu_max"});

  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = read_u64(j["seed"], "seed");
  if (j.contains("n")) cfg.n = read_u64(j["n"], "n");
  if (j.contains("d")) cfg.d = read_u64(j["d"], "d");
  if (j.contains("heads")) cfg.heads = read_u64(j["heads"], "heads");
  if (j.contains("workload")) cfg.workload = parse_workload(j["workload"]);
  if (j.contains("patterns")) {
    if (!j["patterns"].is_array()) config_fail("patterns", "must be an array");
    cfg.patterns.clear();
    std::size_t i = 0;
    for (const auto& pj : j["patterns"]) {
      cfg.patterns.push_back(
          parse_pattern(pj, "patterns[" + std::to_string(i++) + "]"));
    }
  }
  if (j.contains("delta")) cfg.delta = parse_delta(j["delta"]);
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) config_fail("methods", "must be an array");
    cfg.methods.clear();
    std::size_t i = 0;
    for (const auto& mj : j["methods"]) {
      cfg.methods.push_back(
          parse_method(mj, "methods[" + std::to_string(i++) + "]"));
    }
  }
  if (j.contains("suffix_len")) {
    cfg.suffix_len = read_u64(j["suffix_len"], "suffix_len");
  }
  if (j.contains("outputs")) {
    if (!j["outputs"].is_array()) config_fail("outputs", "must be an array");
    cfg.outputs.clear();
    std::size_t i = 0;
    for (const auto& oj : j["outputs"]) {
      cfg.outputs.push_back(
          parse_output(oj, "outputs[" + std::to_string(i++) + "]"));
    }
  }
  if (j.contains("accounting_only")) {
    if (!j["accounting_only"].is_boolean()) {
      config_fail("accounting_only", "must be a boolean");
    }
    cfg.accounting_only = j["accounting_only"].get<bool>();
  }
  if (j.contains("deterministic")) {
    if (!j["deterministic"].is_boolean()) {
      config_fail("deterministic", "must be a boolean");
    }
    cfg.deterministic = j["deterministic"].get<bool>();
  }
  if (j.contains("bound_rows")) {
    cfg.bound_rows = read_u64(j["bound_rows"], "bound_rows");
  }
  if (j.contains("locality_nu_max")) {
    cfg.locality_nu_max = read_u64(j["locality_nu_max"], "locality_nu_max");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

nlohmann::ordered_json workload_to_json(const WorkloadSpec& w) {
  nlohmann::ordered_json j;
  if (std::holds_alternative<GaussianWorkload>(w)) {
    j["kind"] = "gaussian";
  } else if (const auto* needle = std::get_if<NeedleWorkload>(&w)) {
    j["kind"] = "needle";
    j["num_pairs"] = needle->num_pairs;
    j["signal_strength"] = needle->signal_strength;
  } else {
    const auto& ext = std::get<ExternalWorkload>(w);
    j["kind"] = "external";
    j["q"] = ext.q_path;
    j["k"] = ext.k_path;
    j["v"] = ext.v_path;
  }
  return j;
}

nlohmann::ordered_json imputation_to_json(const Imputation& imp) {
  nlohmann::ordered_json j;
  if (std::holds_alternative<Repeat>(imp)) {
    j["kind"] = "repeat";
  } else if (std::holds_alternative<Linear>(imp)) {
    j["kind"] = "linear";
  } else if (const auto* e = std::get_if<Ema>(&imp)) {
    j["kind"] = "ema";
    j["beta"] = e->beta;
  } else {
    const auto& f = std::get<AbgFilter>(imp);
    j["kind"] = "abg";
    j["alpha"] = f.alpha;
    j["beta"] = f.beta;
    j["g"] = f.g;
  }
  return j;
}

std::string output_name(ReportKind k) {
  switch (k) {
    case ReportKind::Comparison: return "comparison";
    case ReportKind::Cost: return "cost";
    case ReportKind::Bound: return "bound";
    case ReportKind::Locality: return "locality";
    case ReportKind::Needle: return "needle";
    case ReportKind::Timings: return "timings";
  }
  return "?";
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["heads"] = cfg.heads;
  j["workload"] = workload_to_json(cfg.workload);
  j["patterns"] = nlohmann::ordered_json::array();
  for (const auto& p : cfg.patterns) {
    nlohmann::ordered_json pj;
    if (const auto* sw = std::get_if<SinkWindow>(&p.kind)) {
      pj["kind"] = "sink_window";
      pj["sink"] = sw->sink;
      pj["window"] = sw->window;
    } else {
      pj["kind"] = "oracle_top_k";
      pj["k"] = std::get<OracleTopK>(p.kind).k;
    }
    j["patterns"].push_back(pj);
  }
  j["delta"]["gamma"] = cfg.delta.gamma;
  if (cfg.delta.tail_dense) {
    j["delta"]["tail_dense"] = *cfg.delta.tail_dense;
  } else {
    j["delta"]["tail_dense"] = nullptr;
  }
  j["delta"]["imputation"] = imputation_to_json(cfg.delta.imputation);
  j["methods"] = nlohmann::ordered_json::array();
  for (Method m : cfg.methods) j["methods"].push_back(method_name(m));
  j["suffix_len"] = cfg.effective_suffix_len();
  j["outputs"] = nlohmann::ordered_json::array();
  for (ReportKind k : cfg.outputs) j["outputs"].push_back(output_name(k));
  j["accounting_only"] = cfg.accounting_only;
  j["deterministic"] = cfg.deterministic;
  j["bound_rows"] = cfg.bound_rows;
  j["locality_nu_max"] = cfg.effective_locality_nu_max();
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

namespace {

struct MethodPlanEntry {
  Method method;
  std::size_t pattern_index;  // ignored for dense
};

// Canonical order: dense first, then sparse/recompute/delta per pattern.
std::vector<MethodPlanEntry> method_plan(const ExperimentConfig& cfg) {
  std::vector<MethodPlanEntry> plan;
  const auto has = [&](Method m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) !=
           cfg.methods.end();
  };
  if (has(Method::Dense)) plan.push_back({Method::Dense, 0});
  for (std::size_t pi = 0; pi < cfg.patterns.size(); ++pi) {
    for (Method m : {Method::Sparse, Method::Recompute, Method::Delta}) {
      if (has(m)) plan.push_back({m, pi});
    }
  }
  return plan;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  const auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count();
}

CostAccount analytic_cost_for(Method m, const SparsityPattern& pattern,
                              std::size_t n, const DeltaConfig& delta) {
  switch (m) {
    case Method::Dense: {
      CostAccount acct;
      acct.dense_entries = dense_entry_count(n);
      acct.method_entries = acct.dense_entries;
      acct.sparsity = 0.0;
      acct.flop_ratio_vs_dense = 1.0;
      return acct;
    }
    case Method::Sparse:
      return analytic_sparse_cost(pattern, n);
    case Method::Recompute:
    case Method::Delta:
      return analytic_delta_cost(pattern, n, delta);
  }
  return {};
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  warnings().reset();

  RunReport report;
  report.config = cfg;

  const auto plan = method_plan(cfg);

  if (cfg.accounting_only) {
    for (const auto& entry : plan) {
      AggregateSummary agg;
      agg.method = entry.method;
      if (entry.method == Method::Dense) {
        agg.pattern_label = "-";
        agg.cost = analytic_cost_for(Method::Dense, SparsityPattern::oracle_top_k(1),
                                     cfg.n, cfg.delta);
      } else {
        const SparsityPattern pattern = cfg.patterns[entry.pattern_index].build();
        agg.pattern_label = pattern.label();
        agg.cost = analytic_cost_for(entry.method, pattern, cfg.n, cfg.delta);
      }
      report.aggregates.push_back(std::move(agg));
    }
    return report;
  }

  std::vector<SparsityPattern> patterns;
  patterns.reserve(cfg.patterns.size());
  for (const auto& spec : cfg.patterns) patterns.push_back(spec.build());

  std::optional<AttentionProblem> head0_problem;

  for (std::size_t head = 0; head < cfg.heads; ++head) {
    const GeneratedWorkload wl =
        generate_workload(cfg.workload, cfg.seed, head, cfg.n, cfg.d);
    const AttentionProblem& p = wl.problem;
    const std::size_t n = p.seq_len();
    const std::size_t suffix = std::min(cfg.effective_suffix_len(), n);
    if (head == 0) head0_problem = p;

    const auto dense_t0 = std::chrono::steady_clock::now();
    const AttentionResult dense = dense_attention(p);
    const double dense_ms = elapsed_ms(dense_t0);

    const QueryRowSelection sel = select_query_rows(n, cfg.delta);
    const std::vector<std::size_t> full_rows = sel.full_rows();

    HeadReport hr;
    hr.head = head;
    for (const auto& entry : plan) {
      MethodRunSummary summary;
      summary.method = entry.method;

      AttentionResult result;
      MethodScoreSpec score_spec;
      double ms = 0.0;
      if (entry.method == Method::Dense) {
        summary.pattern_label = "-";
        result = dense;
        ms = dense_ms;
        summary.cost = cost_account(result, n);
      } else {
        const SparsityPattern& pattern = patterns[entry.pattern_index];
        summary.pattern_label = pattern.label();
        const auto t0 = std::chrono::steady_clock::now();
        switch (entry.method) {
          case Method::Sparse:
            result = sparse_attention(p, pattern);
            score_spec = MethodScoreSpec{&pattern, {}};
            break;
          case Method::Recompute:
            result = recompute_attention(p, pattern, cfg.delta);
            score_spec = MethodScoreSpec{&pattern, full_rows};
            break;
          case Method::Delta:
            result = delta_attention(p, pattern, cfg.delta).result;
            score_spec = MethodScoreSpec{&pattern, full_rows};
            break;
          default:
            break;
        }
        ms = elapsed_ms(t0);
        summary.cost =
            entry.method == Method::Sparse
                ? cost_account(result, n)
                : cost_account(result, n, full_rows);
      }

      if (cfg.wants(ReportKind::Comparison)) {
        summary.comparison = compare_methods(p, dense, result, score_spec, suffix);
      }
      if (wl.needle_truth) {
        summary.needle_score =
            cosine(result.output.row(n - 1),
                   std::span<const double>(*wl.needle_truth));
      }
      summary.wall_ms = cfg.deterministic ? 0.0 : ms;
      hr.methods.push_back(std::move(summary));
    }
    report.heads.push_back(std::move(hr));
  }

  // Aggregate across heads; pattern entry counts are score-free, so a cost
  // account is shared by all heads of a method.
  for (std::size_t mi = 0; mi < plan.size(); ++mi) {
    AggregateSummary agg;
    agg.method = plan[mi].method;
    agg.pattern_label = report.heads.front().methods[mi].pattern_label;
    std::vector<double> mean_cos, median_cos, mean_rho, median_rho, needle, ms;
    for (const auto& hr : report.heads) {
      const auto& s = hr.methods[mi];
      mean_cos.push_back(s.comparison.mean_cosine);
      median_cos.push_back(s.comparison.median_cosine);
      mean_rho.push_back(s.comparison.mean_spearman);
      median_rho.push_back(s.comparison.median_spearman);
      if (s.needle_score) needle.push_back(*s.needle_score);
      ms.push_back(s.wall_ms);
    }
    agg.mean_cosine = mean_inplace(mean_cos);
    agg.median_cosine = mean_inplace(median_cos);
    agg.mean_spearman = mean_inplace(mean_rho);
    agg.median_spearman = mean_inplace(median_rho);
    if (!needle.empty()) agg.needle_score_mean = mean_inplace(needle);
    agg.cost = report.heads.front().methods[mi].cost;
    agg.wall_ms_median = median_inplace(ms);
    report.aggregates.push_back(std::move(agg));
  }

  if (cfg.wants(ReportKind::Bound) && head0_problem && !patterns.empty()) {
    std::vector<std::size_t> rows;
    const std::size_t n = head0_problem->seq_len();
    const std::size_t count = std::min(cfg.bound_rows, n);
    const std::size_t step = std::max<std::size_t>(1, n / count);
    for (std::size_t r = step - 1; r < n && rows.size() < count; r += step) {
      rows.push_back(r);
    }
    report.bounds = bound_sweep(*head0_problem, patterns, rows);
  }

  if (cfg.wants(ReportKind::Locality) && head0_problem && !patterns.empty()) {
    report.locality = delta_locality(*head0_problem, patterns.front(),
                                     cfg.effective_locality_nu_max());
  }

  report.warn_zero_norm_cosine = warnings().zero_norm_cosine.load();
  report.warn_degenerate_spearman = warnings().degenerate_spearman.load();
  report.warn_empty_locality = warnings().empty_locality_bucket.load();
  return report;
}

std::vector<BenchRow> bench(const ExperimentConfig& cfg, std::size_t repeats) {
  validate(cfg);
  if (repeats < 3) throw ConfigError("repeats: must be >= 3");

  const GeneratedWorkload wl =
      generate_workload(cfg.workload, cfg.seed, 0, cfg.n, cfg.d);
  const AttentionProblem& p = wl.problem;
  const std::size_t n = p.seq_len();

  std::vector<SparsityPattern> patterns;
  for (const auto& spec : cfg.patterns) patterns.push_back(spec.build());

  std::vector<BenchRow> rows;
  for (const auto& entry : method_plan(cfg)) {
    BenchRow row;
    row.method = entry.method;
    const SparsityPattern* pattern =
        entry.method == Method::Dense ? nullptr : &patterns[entry.pattern_index];
    row.pattern_label = pattern ? pattern->label() : "-";
    std::vector<double> times;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      switch (entry.method) {
        case Method::Dense: (void)dense_attention(p); break;
        case Method::Sparse: (void)sparse_attention(p, *pattern); break;
        case Method::Recompute:
          (void)recompute_attention(p, *pattern, cfg.delta);
          break;
        case Method::Delta:
          (void)delta_attention(p, *pattern, cfg.delta);
          break;
      }
      times.push_back(elapsed_ms(t0));
    }
    row.median_ms = median_inplace(times);
    row.cost = entry.method == Method::Dense
                   ? analytic_cost_for(Method::Dense, patterns.empty()
                                                          ? SparsityPattern::oracle_top_k(1)
                                                          : patterns[0],
                                       n, cfg.delta)
                   : analytic_cost_for(entry.method, *pattern, n, cfg.delta);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> sweep_experiment(const ExperimentConfig& base,
                                       const std::vector<std::size_t>& gammas,
                                       const std::vector<std::size_t>& windows) {
  if (gammas.empty() || windows.empty()) {
    throw ConfigError("sweep: gamma and window lists must be nonempty");
  }
  std::size_t sink = 4;
  if (!base.patterns.empty()) {
    if (const auto* sw = std::get_if<SinkWindow>(&base.patterns.front().kind)) {
      sink = sw->sink;
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t gamma : gammas) {
    for (std::size_t window : windows) {
      ExperimentConfig cfg = base;
      cfg.delta.gamma = gamma;
      cfg.patterns = {PatternSpec{SinkWindow{sink, window}}};
      const RunReport rep = run_experiment(cfg);
      for (const auto& agg : rep.aggregates) {
        SweepRow row;
        row.gamma = gamma;
        row.window = window;
        row.method = agg.method;
        row.mean_cosine = agg.mean_cosine;
        row.mean_spearman = agg.mean_spearman;
        row.cost = agg.cost;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace attnlab
