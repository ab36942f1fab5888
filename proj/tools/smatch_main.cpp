#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smatch/engines.hpp"
#include "smatch/experiments.hpp"
#include "smatch/report_io.hpp"
#include "smatch/verify.hpp"
#include "smatch/version.hpp"

namespace {

using namespace smatch;

struct CommonArgs {
  std::string model = "semi_dynamic";
  int d = 1;
  std::int64_t N = 1024;
  std::int64_t M = 0;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::string policy = "hierarchical_greedy";
  std::string init = "uniform_random";
  std::string norm = "euclidean";
  std::uint64_t seed = 1;
  int reps = 1;
  std::int64_t warmup = -1;
  double beta = 0.0;
  int l0 = -1;
  int threads = 0;
  std::string out_dir = "out";
};

void add_common_options(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--model", args->model, "static | semi_dynamic | fully_dynamic | capacity");
  cmd->add_option("--d", args->d, "dimension of the unit cube");
  cmd->add_option("--N", args->N, "horizon / demand count");
  cmd->add_option("--M", args->M, "excess supply (static, semi_dynamic)");
  cmd->add_option("--m", args->m, "free supply (fully_dynamic, capacity)");
  cmd->add_option("--n", args->n, "load factor (capacity)");
  cmd->add_option("--policy", args->policy, "hierarchical_greedy | greedy");
  cmd->add_option("--init", args->init, "uniform_random | even_grid");
  cmd->add_option("--norm", args->norm, "euclidean | l1 | linf");
  cmd->add_option("--seed", args->seed, "64-bit RNG seed");
  cmd->add_option("--reps", args->reps, "replications");
  cmd->add_option("--warmup", args->warmup, "periods excluded from statistics (-1: default rule)");
  cmd->add_option("--beta", args->beta, "gamma-schedule slack base (0: default for d)");
  cmd->add_option("--l0", args->l0, "hierarchy depth override (-1: default)");
  cmd->add_option("--threads", args->threads, "worker threads (0: hardware)")
      ->envname("SPATIAL_MATCH_THREADS");
  cmd->add_option("--out-dir", args->out_dir, "output directory");
}

SimConfig to_config(const CommonArgs& args) {
  SimConfig cfg;
  cfg.model = model_from_string(args.model);
  cfg.d = args.d;
  cfg.N = args.N;
  cfg.M = args.M;
  cfg.m = args.m;
  cfg.n = args.n;
  cfg.policy = policy_from_string(args.policy);
  cfg.init = init_from_string(args.init);
  cfg.norm = norm_from_string(args.norm);
  cfg.seed = args.seed;
  cfg.replications = args.reps;
  cfg.warmup = args.warmup;
  cfg.beta_override = args.beta;
  cfg.l0_override = args.l0;
  cfg.threads = args.threads;
  return cfg;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_simulate(const CommonArgs& args, bool per_period_csv,
                 const std::string& command_line) {
  SimConfig cfg = to_config(args);
  cfg.record_per_period = per_period_csv;
  cfg.validate();

  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  manifest.seed = cfg.seed;
  manifest.version = kVersion;
  manifest.command_line = command_line;
  manifest.started_at = iso8601_utc_now();

  CostReport report = run_simulation(cfg);

  std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.json", summary_json(cfg, report).dump(2) + "\n");
  manifest.outputs.push_back((dir / "summary.json").string());

  if (per_period_csv) {
    std::ofstream csv(dir / "periods.csv", std::ios::binary);
    CsvWriter w(csv);
    w.row({"period", "distance", "level"});
    for (std::size_t t = 0; t < report.raw_samples.size(); ++t)
      w.row({std::to_string(t + 1), std::to_string(report.raw_samples[t]),
             std::to_string(report.raw_levels[t])});
    manifest.outputs.push_back((dir / "periods.csv").string());
  }

  manifest.finished_at = iso8601_utc_now();
  write_file(dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  std::printf("mean_cost %.9g stderr %.3g periods %lld -> %s\n",
              report.mean_cost, report.stderr_cost,
              static_cast<long long>(report.periods),
              (dir / "summary.json").c_str());
  return 0;
}

struct SweepArgs {
  CommonArgs common;
  std::string vary = "N";
  std::vector<std::int64_t> values;
  double excess_ratio = -1.0;
  double horizon_per_m = -1.0;
  std::string recipe;
};

// Presets reproducing the headline scaling experiments.
SweepSpec recipe_spec(const std::string& name, SweepSpec spec) {
  auto pow2 = [](int lo, int hi) {
    std::vector<std::int64_t> v;
    for (int k = lo; k <= hi; ++k) v.push_back(std::int64_t{1} << k);
    return v;
  };
  if (name == "static-line") {  // optimal cost ~ N^{-1/2} on the line
    spec.base.model = Model::static_match;
    spec.base.d = 1;
    spec.base.M = 0;
    spec.base.replications = std::max(spec.base.replications, 200);
    spec.vary = SweepVary::N;
    spec.values = pow2(8, 14);
  } else if (name == "semidynamic-excess") {  // d=1, M=N: cost ~ 1/N
    spec.base.model = Model::semi_dynamic;
    spec.base.d = 1;
    spec.base.replications = std::max(spec.base.replications, 30);
    spec.vary = SweepVary::N;
    spec.values = pow2(8, 14);
    spec.excess_ratio = 1.0;
  } else if (name == "semidynamic-d3") {  // d=3, M=0: cost ~ N^{-1/3}
    spec.base.model = Model::semi_dynamic;
    spec.base.d = 3;
    spec.base.M = 0;
    spec.base.replications = std::max(spec.base.replications, 12);
    spec.vary = SweepVary::N;
    spec.values = pow2(9, 18);
  } else if (name == "fullydynamic-d2") {  // cost ~ m^{-1/2}
    spec.base.model = Model::fully_dynamic;
    spec.base.d = 2;
    spec.base.init = Init::even_grid;
    spec.base.replications = std::max(spec.base.replications, 3);
    spec.vary = SweepVary::m;
    spec.values = pow2(6, 12);
    spec.horizon_per_m = 200.0;
  } else if (name == "fullydynamic-d1") {  // sandwich between log and log^2
    spec.base.model = Model::fully_dynamic;
    spec.base.d = 1;
    spec.base.init = Init::even_grid;
    spec.base.replications = std::max(spec.base.replications, 3);
    spec.vary = SweepVary::m;
    spec.values = pow2(6, 12);
    spec.horizon_per_m = 200.0;
  } else {
    throw std::invalid_argument(
        "unknown recipe: " + name +
        " (static-line, semidynamic-excess, semidynamic-d3, fullydynamic-d2, "
        "fullydynamic-d1)");
  }
  return spec;
}

int run_sweep(const SweepArgs& args, const std::string& command_line) {
  SweepSpec spec;
  spec.base = to_config(args.common);
  if (!args.recipe.empty()) {
    spec = recipe_spec(args.recipe, spec);
  } else {
    if (args.vary == "N") spec.vary = SweepVary::N;
    else if (args.vary == "m") spec.vary = SweepVary::m;
    else if (args.vary == "n") spec.vary = SweepVary::n;
    else throw std::invalid_argument("sweep: --vary must be N, m, or n");
    spec.values = args.values;
    spec.excess_ratio = args.excess_ratio;
    spec.horizon_per_m = args.horizon_per_m;
  }
  if (spec.values.empty())
    throw std::invalid_argument("sweep: empty grid (--values)");

  RunManifest manifest;
  manifest.config_hash = config_hash(spec.base);
  manifest.seed = spec.base.seed;
  manifest.version = kVersion;
  manifest.command_line = command_line;
  manifest.started_at = iso8601_utc_now();

  auto points = sweep(spec);

  std::filesystem::path dir(args.common.out_dir);
  std::filesystem::create_directories(dir);
  const char* scale_name = spec.vary == SweepVary::N   ? "N"
                           : spec.vary == SweepVary::m ? "m"
                                                       : "n";
  {
    std::ofstream csv(dir / "sweep.csv", std::ios::binary);
    CsvWriter w(csv);
    w.row({"scale_param", "value", "mean_cost", "stderr", "per_level_json"});
    for (const auto& p : points) {
      std::string se = std::isfinite(p.report.stderr_cost)
                           ? std::to_string(p.report.stderr_cost)
                           : "";
      w.row({scale_name, std::to_string(p.value),
             std::to_string(p.report.mean_cost), se,
             per_level_json(p.report).dump()});
    }
  }
  manifest.outputs.push_back((dir / "sweep.csv").string());

  auto fit = fit_sweep(points);
  write_file(dir / "fit.json", fit_json(fit).dump(2) + "\n");
  manifest.outputs.push_back((dir / "fit.json").string());

  manifest.finished_at = iso8601_utc_now();
  write_file(dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  std::printf("fitted exponent %.4f +- %.4f over %zu points -> %s\n",
              fit.exponent, fit.exponent_stderr, points.size(),
              (dir / "fit.json").c_str());
  return 0;
}

int run_verify(const std::string& suite, int threads) {
  verify::Options opts;
  opts.threads = threads;
  auto criteria = verify::suite_criteria(suite);  // throws on unknown suite
  bool all_pass = true;
  int first_fail = 0;
  std::string first_fail_name;
  for (int k : criteria) {
    auto result = verify::run_criterion(k, opts);
    std::printf("[%s] criterion %d: %s (%.1fs)\n    %s\n",
                result.pass ? "PASS" : "FAIL", result.criterion,
                result.name.c_str(), result.seconds, result.detail.c_str());
    std::fflush(stdout);
    if (!result.pass && all_pass) {
      first_fail = result.criterion;
      first_fail_name = result.name;
    }
    all_pass = all_pass && result.pass;
  }
  if (!all_pass) {
    std::fprintf(stderr, "FAILED: criterion %d (%s)\n", first_fail,
                 first_fail_name.c_str());
    return 3;
  }
  std::printf("suite %s: all checks passed\n", suite.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation toolkit for spatial matching with dynamic arrivals"};
  app.set_version_flag("--version", smatch::kVersion);
  app.set_config("--config", "", "read options from an INI file");
  app.require_subcommand(1);

  CommonArgs sim_args;
  bool per_period_csv = false;
  auto* sim = app.add_subcommand("simulate", "run one engine configuration");
  add_common_options(sim, &sim_args);
  sim->add_flag("--per-period-csv", per_period_csv,
                "also write per-period distances");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "run a grid and fit the scaling law");
  add_common_options(sw, &sweep_args.common);
  sw->add_option("--vary", sweep_args.vary, "grid parameter: N | m | n");
  sw->add_option("--values", sweep_args.values, "grid values")
      ->delimiter(',');
  sw->add_option("--excess-ratio", sweep_args.excess_ratio,
                 "set M = ratio * N per point (>= 0 enables)");
  sw->add_option("--horizon-per-m", sweep_args.horizon_per_m,
                 "set N = factor * m per point (> 0 enables)");
  sw->add_option("--recipe", sweep_args.recipe,
                 "preset grid: static-line, semidynamic-excess, "
                 "semidynamic-d3, fullydynamic-d2, fullydynamic-d1");

  std::string suite;
  int verify_threads = 0;
  auto* ver = app.add_subcommand("verify", "run a reproduction suite");
  ver->add_option("suite", suite,
                  "oracles | invariants | exponents-fast | exponents-full | "
                  "capacity | all")
      ->required();
  ver->add_option("--threads", verify_threads, "worker threads (0: hardware)")
      ->envname("SPATIAL_MATCH_THREADS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string command_line = join_args(argc, argv);
    if (sim->parsed()) return run_simulate(sim_args, per_period_csv, command_line);
    if (sw->parsed()) return run_sweep(sweep_args, command_line);
    if (ver->parsed()) return run_verify(suite, verify_threads);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
  return 0;
}
