#include "smatch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "smatch/rng.hpp"
#include "smatch/thread_pool.hpp"

namespace smatch {

ScalingFit fit_scaling(const std::vector<FitPoint>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_scaling: need at least 3 points");
  const std::size_t n = points.size();
  std::vector<double> x(n), y(n), w(n, 1.0);
  bool weighted = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].scale <= 0.0 || points[i].cost <= 0.0)
      throw std::invalid_argument("fit_scaling: non-positive scale or cost");
    x[i] = std::log(points[i].scale);
    y[i] = std::log(points[i].cost);
    double se = points[i].stderr;
    if (!(se > 0.0) || !std::isfinite(se)) weighted = false;
  }
  if (weighted) {
    for (std::size_t i = 0; i < n; ++i) {
      double se_log = points[i].stderr / points[i].cost;
      w[i] = 1.0 / (se_log * se_log);
    }
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_scaling: degenerate scales");

  ScalingFit fit;
  fit.points = points;
  fit.exponent = sxy / sxx;
  fit.intercept = ybar - fit.exponent * xbar;

  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ss_res += w[i] * r * r;
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = ss_tot > 1e-300 ? 1.0 - ss_res / ss_tot : 1.0;
  if (weighted) {
    // known-weights variance, inflated when the fit is overdispersed
    double dispersion = std::max(1.0, ss_res / static_cast<double>(n - 2));
    fit.exponent_stderr = std::sqrt(dispersion / sxx);
  } else {
    double s2 = n > 2 ? ss_res / static_cast<double>(n - 2) : 0.0;
    fit.exponent_stderr = std::sqrt(s2 / sxx);
  }
  return fit;
}

std::vector<SweepPoint> sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepPoint> out;
  out.reserve(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SimConfig cfg = spec.base;
    std::int64_t v = spec.values[i];
    switch (spec.vary) {
      case SweepVary::N: cfg.N = v; break;
      case SweepVary::m: cfg.m = v; break;
      case SweepVary::n: cfg.n = v; break;
    }
    if (spec.vary == SweepVary::N && spec.excess_ratio >= 0.0)
      cfg.M = static_cast<std::int64_t>(
          std::llround(spec.excess_ratio * static_cast<double>(cfg.N)));
    if (spec.vary == SweepVary::m && spec.horizon_per_m > 0.0)
      cfg.N = static_cast<std::int64_t>(
          std::llround(spec.horizon_per_m * static_cast<double>(cfg.m)));
    cfg.seed = derive_seed(spec.base.seed, i);
    SweepPoint pt;
    pt.value = v;
    pt.report = run_simulation(cfg);
    out.push_back(std::move(pt));
  }
  return out;
}

ScalingFit fit_sweep(const std::vector<SweepPoint>& points) {
  std::vector<FitPoint> fp;
  fp.reserve(points.size());
  for (const auto& p : points)
    fp.push_back({static_cast<double>(p.value), p.report.mean_cost,
                  p.report.stderr_cost});
  return fit_scaling(fp);
}

BootstrapCI bootstrap_exponent_ci(const std::vector<SweepPoint>& points,
                                  int resamples, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<double> exps;
  exps.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    std::vector<FitPoint> fp;
    fp.reserve(points.size());
    for (const auto& p : points) {
      const auto& means = p.report.rep_means;
      double acc = 0.0;
      for (std::size_t k = 0; k < means.size(); ++k)
        acc += means[rng.below(means.size())];
      fp.push_back({static_cast<double>(p.value),
                    acc / static_cast<double>(means.size()), 0.0});
    }
    exps.push_back(fit_scaling(fp).exponent);
  }
  std::sort(exps.begin(), exps.end());
  auto at = [&](double q) {
    auto idx = static_cast<std::size_t>(q * (exps.size() - 1));
    return exps[idx];
  };
  return {at(0.025), at(0.975)};
}

// --- Reflected walk ------------------------------------------------------

double reflected_walk_lower_occupancy(const WalkSpec& spec,
                                      std::int64_t periods, std::int64_t burnin,
                                      Rng& rng) {
  if (spec.lower > spec.upper)
    throw std::invalid_argument("walk: lower > upper");
  if (!(spec.q > 0.0 && spec.q <= 1.0))
    throw std::invalid_argument("walk: q outside (0,1]");
  std::int64_t w = std::clamp(spec.start, spec.lower, spec.upper);
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < burnin + periods; ++t) {
    if (t >= burnin && w == spec.lower) ++hits;
    std::int64_t wt = w;
    if (rng.bernoulli(spec.q)) wt = std::max(spec.lower, wt - 1);
    w = wt;
    if (rng.bernoulli(spec.q)) w = std::min(wt + 1, spec.upper);
  }
  return static_cast<double>(hits) / static_cast<double>(periods);
}

double walk_stationary_lower_exact(const WalkSpec& spec) {
  double states = static_cast<double>(spec.num_states());
  return (1.0 - spec.q) / (states - spec.q);
}

double walk_stationary_lower_approx(const WalkSpec& spec) {
  return (1.0 - spec.q) / static_cast<double>(spec.num_states());
}

WalkOccupancy walk_occupancy_experiment(const WalkSpec& spec, int replicates,
                                        std::int64_t periods,
                                        std::int64_t burnin,
                                        std::uint64_t seed) {
  std::vector<double> occ(static_cast<std::size_t>(replicates));
  parallel_for(replicates, 0, [&](std::int64_t r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    occ[static_cast<std::size_t>(r)] =
        reflected_walk_lower_occupancy(spec, periods, burnin, rng);
  });
  WalkOccupancy out;
  for (double v : occ) out.mean += v;
  out.mean /= static_cast<double>(replicates);
  double s2 = 0.0;
  for (double v : occ) s2 += (v - out.mean) * (v - out.mean);
  out.stderr = replicates > 1
                   ? std::sqrt(s2 / (static_cast<double>(replicates) - 1.0) /
                               static_cast<double>(replicates))
                   : 0.0;
  return out;
}

namespace {

// Ancestor cell (linear index) of a leaf (linear index) at `level`.
std::uint64_t leaf_ancestor_linear(const Hierarchy& hier, std::uint64_t leaf,
                                   int level) {
  std::uint32_t axes[16];
  hier.axes_of_linear(leaf, 0, axes);
  return hier.linear_at_level(axes, level);
}

}  // namespace

bool walk_domination_check(const ArrivalTrace& trace,
                           const GammaSchedule& schedule, int level,
                           std::uint64_t cell, std::string* why) {
  if (trace.supply_leaf.size() != trace.demand_leaf.size() ||
      trace.matched_leaf.size() != trace.demand_leaf.size())
    throw std::invalid_argument("walk_domination_check: trace missing arrival records");
  if (level < 0 || level > trace.l0 - 1)
    throw std::invalid_argument("walk_domination_check: level out of range");
  Hierarchy hier(trace.d, trace.l0);

  const std::int64_t lrb = schedule.lower_bounds[static_cast<std::size_t>(level)];
  const std::int64_t urb = schedule.upper_bounds[static_cast<std::size_t>(level)];
  auto fail = [&](std::int64_t t, const std::string& what) {
    if (why)
      *why = "level " + std::to_string(level) + " cell " + std::to_string(cell) +
             " period " + std::to_string(t) + ": " + what;
    return false;
  };

  // Reconstruct n_h from the trace.
  std::int64_t n = 0;
  for (std::uint64_t leaf = 0; leaf < hier.leaf_count(); ++leaf)
    if (leaf_ancestor_linear(hier, leaf, level) == cell)
      n += trace.initial_leaf_counts[leaf];

  bool started = false;
  std::int64_t w = 0;
  const auto periods = static_cast<std::int64_t>(trace.demand_leaf.size());
  for (std::int64_t t = 1; t <= periods; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    if (!started && n >= lrb) {
      started = true;
      w = std::min(n, urb);
    }
    bool demand_in =
        leaf_ancestor_linear(hier, trace.demand_leaf[i], level) == cell;
    bool matched_in =
        leaf_ancestor_linear(hier, trace.matched_leaf[i], level) == cell;
    bool supply_in =
        leaf_ancestor_linear(hier, trace.supply_leaf[i], level) == cell;

    std::int64_t n_tilde = n - (matched_in ? 1 : 0);
    if (started) {
      if (n < w) return fail(t, "n_h < W_h");
      std::int64_t w_tilde = std::max(lrb, w - (demand_in ? 1 : 0));
      if (n_tilde < w_tilde) return fail(t, "n~_h < W~_h");
      w = std::min(w_tilde + (supply_in ? 1 : 0), urb);
    }
    n = n_tilde + (supply_in ? 1 : 0);
    if (started && n < w) return fail(t + 1, "n_h < W_h");
  }
  return true;
}

bool walk_domination_audit(const ArrivalTrace& trace,
                           const GammaSchedule& schedule, std::string* why) {
  Hierarchy hier(trace.d, trace.l0);
  for (int level = 0; level <= trace.l0 - 1; ++level) {
    for (std::uint64_t cell = 0; cell < hier.cells_at(level); ++cell)
      if (!walk_domination_check(trace, schedule, level, cell, why))
        return false;
  }
  return true;
}

int crossover_level(int d, std::int64_t N, std::int64_t M, int l0) {
  for (int l = 0; l <= l0; ++l) {
    double threshold = std::sqrt(19.0 * static_cast<double>(N) *
                                 std::ldexp(1.0, d * (l0 - l)));
    if (static_cast<double>(M) >= threshold) return l;
  }
  return l0 + 1;
}

std::vector<TailBoundRow> tail_bound_diagnostic(const ArrivalTrace& trace,
                                                std::int64_t N,
                                                std::int64_t M) {
  if (trace.demand_leaf.empty())
    throw std::invalid_argument("tail_bound_diagnostic: empty trace");
  Hierarchy hier(trace.d, trace.l0);
  const int l_hat = crossover_level(trace.d, N, M, trace.l0);
  std::vector<TailBoundRow> rows;
  for (int level = 0; level < trace.l0; ++level) {
    std::vector<std::int64_t> demand(hier.cells_at(level), 0);
    std::vector<std::int64_t> initial(hier.cells_at(level), 0);
    for (std::uint64_t leaf = 0; leaf < hier.leaf_count(); ++leaf)
      initial[leaf_ancestor_linear(hier, leaf, level)] +=
          trace.initial_leaf_counts[leaf];
    for (auto leaf : trace.demand_leaf)
      demand[leaf_ancestor_linear(hier, leaf, level)] += 1;
    double excess = 0.0;
    for (std::uint64_t c = 0; c < hier.cells_at(level); ++c)
      excess += static_cast<double>(std::max<std::int64_t>(
          0, demand[c] - initial[c]));
    excess /= static_cast<double>(hier.cells_at(level));

    TailBoundRow row;
    row.level = level;
    row.mean_excess = excess;
    double p = std::ldexp(1.0, trace.d * (level - trace.l0));
    row.envelope = std::sqrt(static_cast<double>(N) * p);
    row.damped = level >= l_hat;
    if (row.damped)
      row.envelope *= std::exp(-static_cast<double>(M) *
                               static_cast<double>(M) * p /
                               (19.0 * static_cast<double>(N)));
    row.ratio = row.envelope > 0.0 ? row.mean_excess / row.envelope : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// --- Capacity planning ---------------------------------------------------

std::vector<std::int64_t> default_capacity_m_grid(int d, std::int64_t n) {
  double center = std::pow(static_cast<double>(n),
                           static_cast<double>(d) / (d + 1.0));
  std::set<std::int64_t> grid;
  // Quarter-octave steps across a 16x range bracket the optimum even when
  // its constant is far from 1.
  for (int k = -8; k <= 8; ++k) {
    double v = center * std::pow(2.0, 0.25 * k);
    auto m = static_cast<std::int64_t>(std::llround(v));
    if (m >= 4) grid.insert(m);
  }
  return {grid.begin(), grid.end()};
}

CapacityPlanResult capacity_plan(const CapacityPlanSpec& spec) {
  if (spec.n_grid.empty())
    throw std::invalid_argument("capacity_plan: empty n grid");
  for (std::size_t i = 1; i < spec.n_grid.size(); ++i)
    if (spec.n_grid[i] <= spec.n_grid[i - 1])
      throw std::invalid_argument("capacity_plan: n grid must ascend");

  CapacityPlanResult result;
  for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
    std::int64_t n = spec.n_grid[ni];
    std::vector<std::int64_t> m_grid = spec.m_grid_factory
                                           ? spec.m_grid_factory(n)
                                           : default_capacity_m_grid(spec.d, n);
    if (m_grid.size() < 3)
      throw std::invalid_argument("capacity_plan: m grid too small");

    std::vector<double> cost(m_grid.size());
    if (spec.evaluator) {
      for (std::size_t mi = 0; mi < m_grid.size(); ++mi)
        cost[mi] = spec.evaluator(n, m_grid[mi]);
    } else {
      for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
        SimConfig cfg;
        cfg.model = Model::capacity;
        cfg.d = spec.d;
        cfg.n = n;
        cfg.m = m_grid[mi];
        cfg.N = spec.periods;
        cfg.warmup = spec.warmup;
        cfg.replications = spec.replications;
        cfg.init = spec.init;
        cfg.threads = spec.threads;
        cfg.beta_override = spec.beta_override;
        cfg.policy = spec.policy;
        cfg.seed = derive_seed(spec.seed, ni * 1000 + mi);
        cost[mi] = run_capacity_sim(cfg).total_cost_per_period;
      }
    }
    std::size_t best = 0;
    for (std::size_t mi = 1; mi < m_grid.size(); ++mi)
      if (cost[mi] < cost[best]) best = mi;

    CapacityPoint pt;
    pt.n = n;
    pt.m_star_grid = m_grid[best];
    pt.m_star = static_cast<double>(m_grid[best]);
    pt.total_cost = cost[best];
    pt.at_boundary = best == 0 || best + 1 == m_grid.size();
    // Vertex of the log-space parabola through the argmin and its
    // neighbors smooths grid quantization and noise jitter.
    if (!pt.at_boundary) {
      double x0 = std::log(static_cast<double>(m_grid[best - 1]));
      double x1 = std::log(static_cast<double>(m_grid[best]));
      double x2 = std::log(static_cast<double>(m_grid[best + 1]));
      double y0 = cost[best - 1], y1 = cost[best], y2 = cost[best + 1];
      double a = (x1 - x0) * (y1 - y2);
      double b = (x1 - x2) * (y1 - y0);
      double denom = 2.0 * (a - b);
      if (std::fabs(denom) > 1e-300) {
        double xv = x1 - ((x1 - x0) * a - (x1 - x2) * b) / denom;
        if (std::isfinite(xv)) pt.m_star = std::exp(std::clamp(xv, x0, x2));
      }
    }
    result.any_boundary = result.any_boundary || pt.at_boundary;
    result.per_n.push_back(pt);
  }

  std::vector<FitPoint> fp;
  fp.reserve(result.per_n.size());
  for (const auto& pt : result.per_n)
    fp.push_back({static_cast<double>(pt.n), pt.m_star, 0.0});
  result.fit = fit_scaling(fp);
  return result;
}

}  // namespace smatch
