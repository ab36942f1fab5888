#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smatch/engines.hpp"

namespace smatch {

struct FitPoint {
  double scale = 0.0;
  double cost = 0.0;
  double stderr = 0.0;  // <= 0 or non-finite: point carries no weight info
};

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // in log space
  double exponent_stderr = 0.0;
  double r2 = 0.0;
  std::vector<FitPoint> points;
};

// Weighted least squares of log(cost) against log(scale). Weights come from
// the delta-method errors stderr/cost when every point has one; otherwise
// the fit is unweighted. Requires >= 3 points with positive scale and cost.
ScalingFit fit_scaling(const std::vector<FitPoint>& points);

enum class SweepVary { N, m, n };

struct SweepSpec {
  SimConfig base;
  SweepVary vary = SweepVary::N;
  std::vector<std::int64_t> values;
  double excess_ratio = -1.0;   // >= 0: set M = round(ratio * N) per point
  double horizon_per_m = -1.0;  // > 0: set N = round(factor * m) per point
};

struct SweepPoint {
  std::int64_t value = 0;
  CostReport report;
};

// Runs the engine over the grid; each point gets its own derived seed, so
// the sweep output is a pure function of the spec.
std::vector<SweepPoint> sweep(const SweepSpec& spec);

ScalingFit fit_sweep(const std::vector<SweepPoint>& points);

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile CI for the fitted exponent from resampling per-point
// replication means.
BootstrapCI bootstrap_exponent_ci(const std::vector<SweepPoint>& points,
                                  int resamples, std::uint64_t seed);

// --- Reflected-walk machinery --------------------------------------------

// Lazy doubly reflected random walk: one downward step attempt and one
// upward step attempt per period, each with probability q, reflected at
// [lower, upper].
struct WalkSpec {
  int level = 0;
  double q = 0.0;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  std::int64_t start = 0;

  std::int64_t num_states() const { return upper - lower + 1; }
};

// Fraction of periods (after burnin) the standalone walk spends at the lower
// boundary, sampled at period starts.
double reflected_walk_lower_occupancy(const WalkSpec& spec,
                                      std::int64_t periods, std::int64_t burnin,
                                      class Rng& rng);

// Detailed balance gives pi uniform on the interior and top with the lower
// boundary damped by (1 - q): exact value (1-q) / (num_states - q).
double walk_stationary_lower_exact(const WalkSpec& spec);
// The (1-q) / num_states form used as the acceptance target.
double walk_stationary_lower_approx(const WalkSpec& spec);

struct WalkOccupancy {
  double mean = 0.0;
  double stderr = 0.0;
};

// Mean and standard error of the lower-boundary occupancy across independent
// replicate walks.
WalkOccupancy walk_occupancy_experiment(const WalkSpec& spec, int replicates,
                                        std::int64_t periods,
                                        std::int64_t burnin,
                                        std::uint64_t seed);

// Couples the reflected walk W_h pathwise to a recorded fully dynamic trace
// for the node (level, cell) and verifies n_h(t) >= W_h(t) and
// n~_h(t) >= W~_h(t) from T_h onwards, where T_h is the first period the
// count reaches floor(gamma). Returns false and fills `why` on the first
// violation.
bool walk_domination_check(const ArrivalTrace& trace,
                           const GammaSchedule& schedule, int level,
                           std::uint64_t cell, std::string* why = nullptr);

// Runs the coupling for every node at levels 0..l0-1.
bool walk_domination_audit(const ArrivalTrace& trace,
                           const GammaSchedule& schedule,
                           std::string* why = nullptr);

// --- Semi-dynamic tail-bound diagnostic ---------------------------------

struct TailBoundRow {
  int level = 0;
  double mean_excess = 0.0;  // mean over cells of (demand - initial supply)_+
  double envelope = 0.0;     // sqrt(N 2^{d(l-l0)}), damped for l >= l_hat
  double ratio = 0.0;
  bool damped = false;
};

// Smallest level l with M >= sqrt(19 N 2^{d(l0-l)}); l0+1 when none.
int crossover_level(int d, std::int64_t N, std::int64_t M, int l0);

std::vector<TailBoundRow> tail_bound_diagnostic(const ArrivalTrace& trace,
                                                std::int64_t N, std::int64_t M);

// --- Capacity planning ---------------------------------------------------

struct CapacityPlanSpec {
  int d = 2;
  std::vector<std::int64_t> n_grid;
  // Returns the m grid to scan for a given n; empty -> built-in wide
  // geometric grid around n^{d/(d+1)}.
  std::function<std::vector<std::int64_t>(std::int64_t)> m_grid_factory;
  int replications = 4;
  std::int64_t periods = 30000;
  std::int64_t warmup = 4000;
  std::uint64_t seed = 1;
  int threads = 0;
  Init init = Init::even_grid;
  double beta_override = 0.0;
  // Planner default is the exact nearest-neighbor policy: its match-cost
  // curve is smooth in m, whereas hierarchical-greedy thresholds quantize
  // the curve at small scales (the hierarchy depth only changes at powers
  // of 2^d), which makes the per-n argmin jumpy.
  Policy policy = Policy::greedy;
  // Total cost per period for (n, m); empty -> capacity simulation. Tests
  // inject closed forms here.
  std::function<double(std::int64_t n, std::int64_t m)> evaluator;
};

struct CapacityPoint {
  std::int64_t n = 0;
  std::int64_t m_star_grid = 0;  // argmin over the scanned grid
  double m_star = 0.0;           // refined by a local quadratic in log m
  double total_cost = 0.0;
  bool at_boundary = false;
};

struct CapacityPlanResult {
  std::vector<CapacityPoint> per_n;
  ScalingFit fit;  // log m* against log n
  bool any_boundary = false;
};

CapacityPlanResult capacity_plan(const CapacityPlanSpec& spec);

std::vector<std::int64_t> default_capacity_m_grid(int d, std::int64_t n);

}  // namespace smatch
