#include "smatch/engines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <stdexcept>

#include "smatch/rng.hpp"
#include "smatch/static_match.hpp"
#include "smatch/thread_pool.hpp"

namespace smatch {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Model model_from_string(const std::string& s) {
  if (s == "static") return Model::static_match;
  if (s == "semi_dynamic") return Model::semi_dynamic;
  if (s == "fully_dynamic") return Model::fully_dynamic;
  if (s == "capacity") return Model::capacity;
  throw std::invalid_argument("unknown model: " + s);
}

Policy policy_from_string(const std::string& s) {
  if (s == "hierarchical_greedy" || s == "hg") return Policy::hierarchical_greedy;
  if (s == "greedy") return Policy::greedy;
  throw std::invalid_argument("unknown policy: " + s);
}

Init init_from_string(const std::string& s) {
  if (s == "uniform_random") return Init::uniform_random;
  if (s == "even_grid") return Init::even_grid;
  throw std::invalid_argument("unknown init: " + s);
}

const char* to_string(Model m) {
  switch (m) {
    case Model::static_match: return "static";
    case Model::semi_dynamic: return "semi_dynamic";
    case Model::fully_dynamic: return "fully_dynamic";
    case Model::capacity: return "capacity";
  }
  return "?";
}

const char* to_string(Policy p) {
  return p == Policy::hierarchical_greedy ? "hierarchical_greedy" : "greedy";
}

const char* to_string(Init i) {
  return i == Init::uniform_random ? "uniform_random" : "even_grid";
}

void SimConfig::validate() const {
  if (d < 1) throw std::invalid_argument("config: d must be >= 1");
  if (N < 1) throw std::invalid_argument("config: N must be >= 1");
  if (replications < 1)
    throw std::invalid_argument("config: replications must be >= 1");
  if (warmup >= N) throw std::invalid_argument("config: warmup must be < N");
  switch (model) {
    case Model::static_match:
    case Model::semi_dynamic:
      if (M < 0) throw std::invalid_argument("config: M must be >= 0");
      break;
    case Model::fully_dynamic:
      if (m < 2) throw std::invalid_argument("config: m must be >= 2");
      break;
    case Model::capacity:
      if (m < 2) throw std::invalid_argument("config: m must be >= 2");
      if (n < 1) throw std::invalid_argument("config: n must be >= 1");
      break;
  }
}

std::int64_t default_warmup(std::int64_t m, std::int64_t observed_transient) {
  double formula =
      static_cast<double>(m) * (3.0 * std::log(static_cast<double>(m)) + 7.0);
  auto w = static_cast<std::int64_t>(std::ceil(formula));
  return std::max(w, observed_transient);
}

StationarityCheck stationarity_check(const std::vector<double>& samples) {
  StationarityCheck out;
  const std::size_t n = samples.size();
  if (n < 64) return out;
  auto mean_of = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += samples[i];
    return s / static_cast<double>(hi - lo);
  };
  // Batch means of the third and fourth quarters absorb autocorrelation.
  constexpr int kBatches = 16;
  auto batch_stats = [&](std::size_t lo, std::size_t hi, double* mean,
                         double* var) {
    std::size_t len = (hi - lo) / kBatches;
    double ms[kBatches];
    for (int b = 0; b < kBatches; ++b)
      ms[b] = mean_of(lo + b * len, lo + (b + 1) * len);
    double mu = 0.0;
    for (double v : ms) mu += v;
    mu /= kBatches;
    double s2 = 0.0;
    for (double v : ms) s2 += (v - mu) * (v - mu);
    *mean = mu;
    *var = s2 / (kBatches - 1);
  };
  double m3, v3, m4, v4;
  batch_stats(n / 2, 3 * n / 4, &m3, &v3);
  batch_stats(3 * n / 4, n, &m4, &v4);
  out.computed = true;
  out.second_half_mean = mean_of(n / 2, n);
  out.last_quarter_mean = m4;
  double se = std::sqrt((v3 + v4) / kBatches);
  out.z = se > 0.0 ? (m3 - m4) / se : 0.0;
  out.ok = std::fabs(out.z) < 3.0;
  return out;
}

namespace {

// Per-replication output, merged in replication order afterwards.
struct RepOut {
  std::vector<double> costs;
  std::vector<int> levels;
  std::int64_t transient = -1;
  bool transient_complete = true;
  std::int64_t violations = 0;
  std::string first_violation;
  std::int64_t stockouts = 0;
  double static_avg_cost = 0.0;
};

void place_initial_supply(SupplyTree& tree, std::int64_t count, Init init,
                          Rng& rng) {
  const Hierarchy& hier = tree.hierarchy();
  const int d = hier.dim();
  if (init == Init::uniform_random) {
    for (std::int64_t i = 0; i < count; ++i)
      tree.insert(sample_point(rng, d));
    return;
  }
  // Evenly spread: cycle the leaves in linear order, dropping each unit at
  // the leaf center, so every level-l cell holds its share of supply up to
  // rounding.
  const std::uint64_t leaves = hier.leaf_count();
  const double side = hier.side_length(0);
  std::uint32_t axes[16];
  Point p(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < count; ++i) {
    std::uint64_t leaf = static_cast<std::uint64_t>(i) % leaves;
    hier.axes_of_linear(leaf, 0, axes);
    for (int k = 0; k < d; ++k)
      p[static_cast<std::size_t>(k)] = (axes[k] + 0.5) * side;
    tree.insert(p);
  }
}

GammaSchedule make_schedule(const SimConfig& cfg, int l0) {
  if (cfg.model == Model::semi_dynamic) return gamma_schedule_zero(cfg.d, l0);
  double beta = cfg.beta_override > 0.0 ? cfg.beta_override : default_beta(cfg.d);
  return gamma_schedule_fully_dynamic(cfg.d, cfg.m, l0, beta);
}

int resolve_l0(const SimConfig& cfg) {
  if (cfg.l0_override >= 0) return cfg.l0_override;
  switch (cfg.model) {
    case Model::semi_dynamic:
      return default_l0_semi_dynamic(cfg.d, cfg.N);
    case Model::fully_dynamic:
    case Model::capacity:
      return default_l0_fully_dynamic(cfg.d, cfg.m);
    default:
      return 0;
  }
}

struct TraceSink {
  ArrivalTrace* trace = nullptr;
  void init(const SupplyTree& tree, std::int64_t periods, bool with_supply) {
    if (!trace) return;
    const Hierarchy& h = tree.hierarchy();
    trace->d = h.dim();
    trace->l0 = h.root_level();
    trace->initial_leaf_counts.resize(h.leaf_count());
    for (std::uint64_t leaf = 0; leaf < h.leaf_count(); ++leaf)
      trace->initial_leaf_counts[leaf] = tree.count(0, leaf);
    trace->demand_leaf.reserve(static_cast<std::size_t>(periods));
    trace->matched_leaf.reserve(static_cast<std::size_t>(periods));
    if (with_supply) trace->supply_leaf.reserve(static_cast<std::size_t>(periods));
  }
  void record_demand(const Hierarchy& h, const Point& p) {
    if (trace) trace->demand_leaf.push_back(h.leaf_linear(p));
  }
  void record_match(const Hierarchy& h, const MatchDecision& d) {
    if (trace)
      trace->matched_leaf.push_back(
          h.linear_from_level_axes(d.leaf.index.data(), 0));
  }
  void record_supply(const Hierarchy& h, const Point& p) {
    if (trace) trace->supply_leaf.push_back(h.leaf_linear(p));
  }
};

RepOut run_policy_rep(const SimConfig& cfg, std::int64_t rep,
                      ArrivalTrace* trace) {
  Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
  const bool fully = cfg.model != Model::semi_dynamic;
  const int l0 = resolve_l0(cfg);
  Hierarchy hier(cfg.d, l0);
  SupplyTree tree(hier);

  const bool hg = cfg.policy == Policy::hierarchical_greedy;
  GammaSchedule schedule;
  std::unique_ptr<HgInvariantMonitor> monitor;
  if (hg) {
    schedule = make_schedule(cfg, l0);
    monitor = std::make_unique<HgInvariantMonitor>(hier, schedule);
  }

  std::int64_t total_supply =
      fully ? cfg.m : cfg.N + cfg.M;
  place_initial_supply(tree, total_supply, cfg.init, rng);

  if (monitor) {
    tree.set_observer(monitor.get());
    monitor->begin_period(1);
    monitor->capture_initial(tree);
  }

  TraceSink sink{trace};
  sink.init(tree, cfg.N, fully);

  HgOptions opts;
  opts.leaf_pick = cfg.leaf_pick;
  opts.norm = cfg.norm;
  opts.monitor = cfg.debug_invariants ? monitor.get() : nullptr;

  RepOut out;
  out.costs.resize(static_cast<std::size_t>(cfg.N));
  out.levels.resize(static_cast<std::size_t>(cfg.N));

  for (std::int64_t t = 1; t <= cfg.N; ++t) {
    if (monitor) monitor->begin_period(t);
    if (cfg.debug_invariants && fully && tree.root_count() != cfg.m)
      throw std::runtime_error("fully dynamic: supply conservation broken");
    Point demand = sample_point(rng, cfg.d);
    sink.record_demand(hier, demand);
    MatchDecision decision = hg ? hg_match(tree, schedule, demand, opts)
                                : greedy_match(tree, demand, cfg.norm);
    sink.record_match(hier, decision);
    out.costs[static_cast<std::size_t>(t - 1)] = decision.distance;
    out.levels[static_cast<std::size_t>(t - 1)] = decision.level;
    if (fully) {
      Point supply = sample_point(rng, cfg.d);
      sink.record_supply(hier, supply);
      hg_insert_supply(tree, supply);
    }
  }

  if (monitor) {
    out.transient = monitor->transient_max();
    out.transient_complete = monitor->all_reached();
    out.violations = monitor->violations();
    out.first_violation = monitor->first_violation();
  }
  return out;
}

RepOut run_capacity_rep(const SimConfig& cfg, std::int64_t rep) {
  Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
  const int l0 = resolve_l0(cfg);
  Hierarchy hier(cfg.d, l0);
  SupplyTree tree(hier);

  const bool hg = cfg.policy == Policy::hierarchical_greedy;
  GammaSchedule schedule;
  std::unique_ptr<HgInvariantMonitor> monitor;
  if (hg) {
    schedule = make_schedule(cfg, l0);
    monitor = std::make_unique<HgInvariantMonitor>(hier, schedule);
  }
  place_initial_supply(tree, cfg.m, cfg.init, rng);
  if (monitor) {
    tree.set_observer(monitor.get());
    monitor->begin_period(1);
    monitor->capture_initial(tree);
  }

  HgOptions opts;
  opts.leaf_pick = cfg.leaf_pick;
  opts.norm = cfg.norm;
  opts.monitor = cfg.debug_invariants ? monitor.get() : nullptr;

  RepOut out;
  out.costs.reserve(static_cast<std::size_t>(cfg.N));
  out.levels.reserve(static_cast<std::size_t>(cfg.N));

  // Matched units stay busy for n periods, then rejoin at a fresh uniform
  // location. The n units notionally in transit at period 1 return one per
  // period over periods 1..n.
  std::deque<std::int64_t> returns;
  for (std::int64_t t = 1; t <= cfg.n; ++t) returns.push_back(t);
  std::int64_t busy = cfg.n;
  std::deque<Point> waiting;

  auto serve = [&](const Point& demand) {
    MatchDecision decision = hg ? hg_match(tree, schedule, demand, opts)
                                : greedy_match(tree, demand, cfg.norm);
    out.costs.push_back(decision.distance);
    out.levels.push_back(decision.level);
    ++busy;
    returns.push_back(0);  // placeholder, fixed up by caller with t + n
  };

  for (std::int64_t t = 1; t <= cfg.N; ++t) {
    if (monitor) monitor->begin_period(t);
    if (cfg.debug_invariants && tree.root_count() + busy != cfg.n + cfg.m)
      throw std::runtime_error("capacity: free + busy conservation broken");
    // Demands that found no free supply earlier are served first.
    while (!waiting.empty() && tree.root_count() > 0) {
      serve(waiting.front());
      waiting.pop_front();
      returns.back() = t + cfg.n;
    }
    Point demand = sample_point(rng, cfg.d);
    if (tree.root_count() == 0) {
      ++out.stockouts;
      waiting.push_back(demand);
    } else {
      serve(demand);
      returns.back() = t + cfg.n;
    }
    while (!returns.empty() && returns.front() == t) {
      returns.pop_front();
      --busy;
      hg_insert_supply(tree, sample_point(rng, cfg.d));
    }
  }

  if (monitor) {
    out.transient = monitor->transient_max();
    out.transient_complete = monitor->all_reached();
    out.violations = monitor->violations();
    out.first_violation = monitor->first_violation();
  }
  return out;
}

RepOut run_static_rep(const SimConfig& cfg, std::int64_t rep) {
  Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
  RepOut out;
  if (cfg.d == 1) {
    std::vector<double> supply(static_cast<std::size_t>(cfg.N + cfg.M));
    std::vector<double> demand(static_cast<std::size_t>(cfg.N));
    for (auto& x : supply) x = rng.uniform01();
    for (auto& x : demand) x = rng.uniform01();
    double total = cfg.M == 0 ? match_line_balanced(supply, demand).total_cost
                              : line_excess_cost(supply, demand);
    out.static_avg_cost = total / static_cast<double>(cfg.N);
  } else {
    std::vector<Point> supply, demand;
    supply.reserve(static_cast<std::size_t>(cfg.N + cfg.M));
    demand.reserve(static_cast<std::size_t>(cfg.N));
    for (std::int64_t i = 0; i < cfg.N + cfg.M; ++i)
      supply.push_back(sample_point(rng, cfg.d));
    for (std::int64_t i = 0; i < cfg.N; ++i)
      demand.push_back(sample_point(rng, cfg.d));
    out.static_avg_cost =
        match_exact_flow(supply, demand, cfg.norm, cfg.flow_cap).avg_cost;
  }
  return out;
}

CostReport aggregate_policy(const SimConfig& cfg, std::vector<RepOut> reps) {
  CostReport report;
  report.periods = cfg.N;

  std::int64_t transient = -1;
  for (const auto& r : reps) {
    transient = std::max(transient, r.transient);
    report.transient_complete = report.transient_complete && r.transient_complete;
    report.invariant_violations += r.violations;
    if (report.first_violation.empty() && !r.first_violation.empty())
      report.first_violation = r.first_violation;
    report.stockouts += r.stockouts;
  }
  report.transient_estimate = transient;

  std::int64_t warmup = 0;
  if (cfg.model == Model::fully_dynamic || cfg.model == Model::capacity) {
    warmup = cfg.warmup >= 0 ? cfg.warmup
                             : default_warmup(cfg.m, std::max<std::int64_t>(
                                                         transient, 0));
    if (warmup >= cfg.N) {
      warmup = cfg.N / 2;
      report.warmup_clamped = true;
    }
  } else if (cfg.warmup > 0) {
    warmup = cfg.warmup;
  }
  report.warmup_used = warmup;

  std::vector<LevelStats> levels;
  double mean_acc = 0.0;
  for (const auto& r : reps) {
    double sum = 0.0;
    std::int64_t counted = 0;
    for (std::size_t t = static_cast<std::size_t>(warmup); t < r.costs.size();
         ++t) {
      sum += r.costs[t];
      ++counted;
      int lv = r.levels[t];
      if (static_cast<std::size_t>(lv) >= levels.size())
        levels.resize(static_cast<std::size_t>(lv) + 1);
      levels[static_cast<std::size_t>(lv)].match_count += 1;
      levels[static_cast<std::size_t>(lv)].total_cost += r.costs[t];
    }
    report.matched += counted;
    report.rep_means.push_back(counted > 0 ? sum / static_cast<double>(counted)
                                           : 0.0);
    mean_acc += report.rep_means.back();
  }
  report.mean_cost = mean_acc / static_cast<double>(reps.size());
  if (reps.size() >= 2) {
    double s2 = 0.0;
    for (double v : report.rep_means)
      s2 += (v - report.mean_cost) * (v - report.mean_cost);
    report.stderr_cost = std::sqrt(
        s2 / (static_cast<double>(reps.size()) - 1.0) /
        static_cast<double>(reps.size()));
  } else {
    report.stderr_cost = kNaN;
  }

  for (std::size_t l = 0; l < levels.size(); ++l) {
    levels[l].level = static_cast<int>(l);
    if (levels[l].match_count > 0) report.per_level.push_back(levels[l]);
  }

  if (cfg.record_per_period && !reps.empty()) {
    report.raw_samples = std::move(reps.front().costs);
    report.raw_levels = std::move(reps.front().levels);
    std::vector<double> post(report.raw_samples.begin() +
                                 static_cast<std::ptrdiff_t>(warmup),
                             report.raw_samples.end());
    report.stationarity = stationarity_check(post);
  }

  if (cfg.model == Model::capacity) {
    report.supply_cost_per_period =
        static_cast<double>(cfg.m) / static_cast<double>(cfg.n);
    report.total_cost_per_period =
        report.supply_cost_per_period + report.mean_cost;
  }
  return report;
}

std::vector<RepOut> run_reps(const SimConfig& cfg, ArrivalTrace* trace) {
  std::vector<RepOut> reps(static_cast<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, cfg.threads, [&](std::int64_t r) {
    switch (cfg.model) {
      case Model::static_match:
        reps[static_cast<std::size_t>(r)] = run_static_rep(cfg, r);
        break;
      case Model::capacity:
        reps[static_cast<std::size_t>(r)] = run_capacity_rep(cfg, r);
        break;
      default:
        reps[static_cast<std::size_t>(r)] =
            run_policy_rep(cfg, r, r == 0 ? trace : nullptr);
    }
  });
  return reps;
}

}  // namespace

CostReport run_static(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.model != Model::static_match)
    throw std::invalid_argument("run_static: wrong model");
  if (cfg.d >= 2 && static_cast<std::size_t>(cfg.N) > cfg.flow_cap)
    throw std::invalid_argument("run_static: N exceeds exact-solver cap");
  auto reps = run_reps(cfg, nullptr);

  CostReport report;
  report.periods = cfg.N;
  report.matched = cfg.N * cfg.replications;
  double acc = 0.0;
  for (const auto& r : reps) {
    report.rep_means.push_back(r.static_avg_cost);
    acc += r.static_avg_cost;
  }
  report.mean_cost = acc / static_cast<double>(reps.size());
  if (reps.size() >= 2) {
    double s2 = 0.0;
    for (double v : report.rep_means)
      s2 += (v - report.mean_cost) * (v - report.mean_cost);
    report.stderr_cost = std::sqrt(
        s2 / (static_cast<double>(reps.size()) - 1.0) /
        static_cast<double>(reps.size()));
  } else {
    report.stderr_cost = kNaN;
  }
  return report;
}

CostReport run_semi_dynamic(const SimConfig& cfg, ArrivalTrace* trace) {
  cfg.validate();
  if (cfg.model != Model::semi_dynamic)
    throw std::invalid_argument("run_semi_dynamic: wrong model");
  return aggregate_policy(cfg, run_reps(cfg, trace));
}

CostReport run_fully_dynamic(const SimConfig& cfg, ArrivalTrace* trace) {
  cfg.validate();
  if (cfg.model != Model::fully_dynamic)
    throw std::invalid_argument("run_fully_dynamic: wrong model");
  return aggregate_policy(cfg, run_reps(cfg, trace));
}

CostReport run_capacity_sim(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.model != Model::capacity)
    throw std::invalid_argument("run_capacity_sim: wrong model");
  return aggregate_policy(cfg, run_reps(cfg, nullptr));
}

CostReport run_simulation(const SimConfig& cfg, ArrivalTrace* trace) {
  switch (cfg.model) {
    case Model::static_match: return run_static(cfg);
    case Model::semi_dynamic: return run_semi_dynamic(cfg, trace);
    case Model::fully_dynamic: return run_fully_dynamic(cfg, trace);
    case Model::capacity: return run_capacity_sim(cfg);
  }
  throw std::invalid_argument("run_simulation: unknown model");
}

NnEstimate estimate_nn_distance(int d, std::int64_t m, std::int64_t samples,
                                std::uint64_t seed, Norm norm) {
  if (m < 1) throw std::invalid_argument("estimate_nn_distance: m < 1");
  if (samples < 1) throw std::invalid_argument("estimate_nn_distance: samples < 1");
  Rng rng(seed, 0);
  double sum = 0.0, sum2 = 0.0;
  Point demand(static_cast<std::size_t>(d)), supply(static_cast<std::size_t>(d));
  for (std::int64_t s = 0; s < samples; ++s) {
    for (auto& x : demand) x = rng.uniform01();
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < m; ++j) {
      for (auto& x : supply) x = rng.uniform01();
      double dist = distance(demand, supply, norm);
      if (dist < best) best = dist;
    }
    sum += best;
    sum2 += best * best;
  }
  NnEstimate est;
  est.samples = samples;
  est.mean = sum / static_cast<double>(samples);
  double var = samples > 1 ? (sum2 - sum * sum / static_cast<double>(samples)) /
                                 (static_cast<double>(samples) - 1.0)
                           : 0.0;
  est.stderr = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
  return est;
}

}  // namespace smatch
