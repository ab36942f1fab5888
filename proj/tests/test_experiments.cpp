#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdint>
#include <vector>

#include "smatch/experiments.hpp"
#include "smatch/rng.hpp"

using namespace smatch;

TEST_CASE("fit_scaling recovers exact power laws") {
  std::vector<FitPoint> pts;
  for (double x : {16.0, 64.0, 256.0, 1024.0})
    pts.push_back({x, 2.0 * std::pow(x, -0.5), 0.0});
  auto fit = fit_scaling(pts);
  CHECK(fit.exponent == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)));

  std::vector<FitPoint> flat;
  for (double x : {1.0, 2.0, 4.0, 8.0}) flat.push_back({x, 3.0, 0.0});
  CHECK(fit_scaling(flat).exponent == doctest::Approx(0.0));
}

TEST_CASE("fit_scaling on a noisy slope stays within 0.02") {
  Rng rng(61, 0);
  std::vector<FitPoint> pts;
  for (int k = 4; k <= 14; ++k) {
    double x = std::pow(2.0, k);
    double noise = 1.0 + 0.01 * (2.0 * rng.uniform01() - 1.0);
    pts.push_back({x, 5.0 * noise / x, 0.0});
  }
  auto fit = fit_scaling(pts);
  CHECK(std::fabs(fit.exponent + 1.0) <= 0.02);
}

TEST_CASE("fit_scaling is invariant to rescaling costs") {
  std::vector<FitPoint> pts;
  Rng rng(62, 0);
  for (int k = 3; k <= 9; ++k) {
    double x = std::pow(2.0, k);
    pts.push_back({x, std::pow(x, -0.7) * (1.0 + 0.05 * rng.uniform01()),
                   0.0});
  }
  auto base = fit_scaling(pts);
  auto scaled = pts;
  for (auto& p : scaled) p.cost *= 7.0;
  auto fit = fit_scaling(scaled);
  CHECK(fit.exponent == doctest::Approx(base.exponent).epsilon(1e-12));
  CHECK(fit.intercept ==
        doctest::Approx(base.intercept + std::log(7.0)).epsilon(1e-9));
}

TEST_CASE("fit_scaling input validation") {
  CHECK_THROWS_AS(fit_scaling({{1.0, 1.0, 0.0}, {2.0, 0.5, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fit_scaling({{1.0, 1.0, 0.0}, {2.0, -0.5, 0.0}, {4.0, 0.2, 0.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      fit_scaling({{0.0, 1.0, 0.0}, {2.0, 0.5, 0.0}, {4.0, 0.2, 0.0}}),
      std::invalid_argument);
}

TEST_CASE("sweep runs the grid deterministically with per-point seeds") {
  SweepSpec spec;
  spec.base.model = Model::semi_dynamic;
  spec.base.d = 1;
  spec.base.M = 0;
  spec.base.replications = 4;
  spec.base.seed = 63;
  spec.vary = SweepVary::N;
  spec.values = {256, 512, 1024, 2048, 4096};
  auto a = sweep(spec);
  auto b = sweep(spec);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].report.mean_cost == b[i].report.mean_cost);
  // semi-dynamic d=1 M=0 cost decreases in N
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(a[i].report.mean_cost < a[i - 1].report.mean_cost);

  CHECK_THROWS_AS(sweep(SweepSpec{}), std::invalid_argument);
}

TEST_CASE("fully dynamic sweep carries per-level stats for every point") {
  SweepSpec spec;
  spec.base.model = Model::fully_dynamic;
  spec.base.d = 2;
  spec.base.init = Init::even_grid;
  spec.base.replications = 1;
  spec.base.seed = 64;
  spec.vary = SweepVary::m;
  spec.values = {64, 128, 256};
  spec.horizon_per_m = 50.0;
  auto pts = sweep(spec);
  for (const auto& p : pts) {
    CHECK(p.report.periods == 50 * p.value);
    CHECK(!p.report.per_level.empty());
  }
}

TEST_CASE("bootstrap CI brackets the fitted exponent") {
  SweepSpec spec;
  spec.base.model = Model::semi_dynamic;
  spec.base.d = 1;
  spec.base.replications = 8;
  spec.base.seed = 65;
  spec.vary = SweepVary::N;
  spec.values = {256, 512, 1024, 2048, 4096, 8192};
  spec.excess_ratio = 1.0;
  auto pts = sweep(spec);
  auto fit = fit_sweep(pts);
  auto ci = bootstrap_exponent_ci(pts, 200, 66);
  CHECK(ci.lo <= fit.exponent);
  CHECK(fit.exponent <= ci.hi);
  CHECK(ci.hi - ci.lo < 0.3);
}

TEST_CASE("standalone reflected walk matches its stationary law") {
  WalkSpec spec;
  spec.q = 1.0 / 16.0;
  spec.lower = 2;
  spec.upper = 7;
  spec.start = 7;
  // exact detailed-balance value (1-q)/(states - q)
  double exact = walk_stationary_lower_exact(spec);
  CHECK(exact == doctest::Approx((1.0 - 1.0 / 16.0) / (6.0 - 1.0 / 16.0)));
  CHECK(walk_stationary_lower_approx(spec) ==
        doctest::Approx((1.0 - 1.0 / 16.0) / 6.0));
  CHECK(exact < 1.0 / 6.0);  // strictly below the uniform mass

  auto occ = walk_occupancy_experiment(spec, 150, 1 << 17, 1 << 14, 67);
  CHECK(std::fabs(occ.mean - exact) <= 3.5 * occ.stderr);

  Rng rng(1, 0);
  CHECK_THROWS_AS(reflected_walk_lower_occupancy({0, 0.0, 0, 3, 0}, 10, 0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(reflected_walk_lower_occupancy({0, 0.5, 5, 3, 5}, 10, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("walk domination holds on a real trace and the detector fires on a corrupted one") {
  SimConfig cfg;
  cfg.model = Model::fully_dynamic;
  cfg.d = 1;
  cfg.m = 64;
  cfg.N = 30000;
  cfg.replications = 1;
  cfg.seed = 68;
  cfg.init = Init::uniform_random;
  cfg.record_trace = true;
  ArrivalTrace trace;
  run_fully_dynamic(cfg, &trace);
  auto schedule = gamma_schedule_fully_dynamic(
      1, 64, default_l0_fully_dynamic(1, 64), 2.0);
  std::string why;
  CHECK(walk_domination_audit(trace, schedule, &why));

  // Corrupt the trace: find a period where some level-l cell sits exactly at
  // its floor while the demand is elsewhere, and pretend the match removed a
  // unit from that cell. The coupled walk must notice.
  Hierarchy h(trace.d, trace.l0);
  const int level = trace.l0 - 1;
  REQUIRE(level >= 0);
  std::int64_t lrb = schedule.lower_bounds[level];
  std::vector<std::int64_t> counts(h.cells_at(level), 0);
  for (std::uint64_t leaf = 0; leaf < h.leaf_count(); ++leaf) {
    std::uint32_t axes[4];
    h.axes_of_linear(leaf, 0, axes);
    counts[h.linear_at_level(axes, level)] += trace.initial_leaf_counts[leaf];
  }
  auto anc = [&](std::uint64_t leaf) {
    std::uint32_t axes[4];
    h.axes_of_linear(leaf, 0, axes);
    return h.linear_at_level(axes, level);
  };
  bool corrupted = false;
  for (std::size_t t = 0; t < trace.demand_leaf.size() && !corrupted; ++t) {
    for (std::uint64_t cell = 0; cell < h.cells_at(level); ++cell) {
      if (counts[cell] == lrb && anc(trace.demand_leaf[t]) != cell) {
        trace.matched_leaf[t] = cell << level;  // a leaf under this cell
        corrupted = true;
        break;
      }
    }
    if (!corrupted) {
      counts[anc(trace.matched_leaf[t])] -= 1;
      counts[anc(trace.supply_leaf[t])] += 1;
    }
  }
  REQUIRE(corrupted);
  CHECK_FALSE(walk_domination_audit(trace, schedule, &why));
  CHECK(!why.empty());
}

TEST_CASE("walk domination requires supply arrival records") {
  SimConfig cfg;
  cfg.model = Model::semi_dynamic;
  cfg.d = 1;
  cfg.N = 512;
  cfg.replications = 1;
  cfg.seed = 69;
  cfg.record_trace = true;
  ArrivalTrace trace;
  run_semi_dynamic(cfg, &trace);
  auto schedule = gamma_schedule_zero(1, trace.l0);
  CHECK_THROWS_AS(walk_domination_check(trace, schedule, 0, 0, nullptr),
                  std::invalid_argument);
}

TEST_CASE("crossover level of the tail bound") {
  // d=1, N=1024, l0=10: need M >= sqrt(19*1024*2^(10-l));
  // l=4 -> 1115.9 > 1024, l=5 -> 789.0 <= 1024.
  CHECK(crossover_level(1, 1024, 1024, 10) == 5);
  CHECK(crossover_level(1, 1024, 0, 10) == 11);   // never: l0 + 1
  CHECK(crossover_level(1, 1024, 100000, 10) == 0);
}

TEST_CASE("tail-bound diagnostic: excess tracks the binomial envelope") {
  SimConfig cfg;
  cfg.model = Model::semi_dynamic;
  cfg.d = 1;
  cfg.N = 1 << 14;
  cfg.M = 0;
  cfg.replications = 1;
  cfg.seed = 70;
  cfg.record_trace = true;
  ArrivalTrace trace;
  run_semi_dynamic(cfg, &trace);
  auto rows = tail_bound_diagnostic(trace, cfg.N, cfg.M);
  REQUIRE(static_cast<int>(rows.size()) == trace.l0);
  // With M = 0 the excess at level l is E(Bin - Bin')_+ ~ sqrt(N 2^{l-l0}),
  // so the ratios stay in a fixed band across levels.
  for (const auto& row : rows) {
    CHECK_FALSE(row.damped);
    if (row.level <= trace.l0 - 3) {
      CHECK(row.ratio > 0.15);
      CHECK(row.ratio < 1.2);
    }
  }

  // Large excess supply wipes out the top-level excess demand.
  cfg.M = 4 * cfg.N;
  cfg.seed = 71;
  ArrivalTrace trace2;
  run_semi_dynamic(cfg, &trace2);
  auto rows2 = tail_bound_diagnostic(trace2, cfg.N, cfg.M);
  int l_hat = crossover_level(1, cfg.N, cfg.M, trace2.l0);
  for (const auto& row : rows2) {
    if (row.level >= l_hat) {
      CHECK(row.damped);
      CHECK(row.mean_excess <= 0.05 * std::sqrt(static_cast<double>(cfg.N) *
                                                std::ldexp(1.0, row.level -
                                                                    trace2.l0)));
    }
  }

  // N = 1: the excess is at most one demand unit everywhere.
  cfg.N = 1;
  cfg.M = 0;
  cfg.seed = 72;
  ArrivalTrace trace3;
  run_semi_dynamic(cfg, &trace3);
  for (const auto& row : tail_bound_diagnostic(trace3, 1, 0))
    CHECK(row.mean_excess <= 1.0);
}

TEST_CASE("capacity planner recovers a synthetic closed-form optimum") {
  CapacityPlanSpec spec;
  spec.d = 2;
  spec.n_grid = {256, 512, 1024, 2048, 4096, 8192};
  spec.evaluator = [](std::int64_t n, std::int64_t m) {
    return static_cast<double>(m) / static_cast<double>(n) +
           1.0 / std::sqrt(static_cast<double>(m));
  };
  auto result = capacity_plan(spec);
  CHECK_FALSE(result.any_boundary);
  for (const auto& pt : result.per_n) {
    double analytic = std::pow(static_cast<double>(pt.n) / 2.0, 2.0 / 3.0);
    CHECK(std::fabs(std::log(pt.m_star / analytic)) <= std::log(1.13));
  }
  CHECK(std::fabs(result.fit.exponent - 2.0 / 3.0) <= 0.02);

  // d=3: closed form m/n + m^{-1/3} has its optimum at (n/3)^{3/4}
  CapacityPlanSpec spec3;
  spec3.d = 3;
  spec3.n_grid = {256, 512, 1024, 2048, 4096, 8192};
  spec3.evaluator = [](std::int64_t n, std::int64_t m) {
    return static_cast<double>(m) / static_cast<double>(n) +
           std::pow(static_cast<double>(m), -1.0 / 3.0);
  };
  auto result3 = capacity_plan(spec3);
  CHECK_FALSE(result3.any_boundary);
  for (const auto& pt : result3.per_n) {
    double analytic = std::pow(static_cast<double>(pt.n) / 3.0, 0.75);
    CHECK(std::fabs(std::log(pt.m_star / analytic)) <= std::log(1.13));
  }
  CHECK(std::fabs(result3.fit.exponent - 0.75) <= 0.02);

  // A grid that misses the optimum raises the boundary flag.
  spec.m_grid_factory = [](std::int64_t) {
    return std::vector<std::int64_t>{2048, 2896, 4096};
  };
  auto clipped = capacity_plan(spec);
  CHECK(clipped.any_boundary);

  CHECK_THROWS_AS(capacity_plan(CapacityPlanSpec{}), std::invalid_argument);
}
