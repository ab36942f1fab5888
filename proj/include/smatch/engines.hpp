#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smatch/geometry.hpp"
#include "smatch/policies.hpp"

namespace smatch {

enum class Model { static_match, semi_dynamic, fully_dynamic, capacity };
enum class Policy { hierarchical_greedy, greedy };
enum class Init { uniform_random, even_grid };

Model model_from_string(const std::string&);
Policy policy_from_string(const std::string&);
Init init_from_string(const std::string&);
const char* to_string(Model);
const char* to_string(Policy);
const char* to_string(Init);

struct SimConfig {
  int d = 1;
  Model model = Model::semi_dynamic;
  std::int64_t N = 1024;  // horizon / demand count
  std::int64_t M = 0;     // excess supply (static, semi-dynamic)
  std::int64_t m = 0;     // free supply (fully dynamic, capacity)
  std::int64_t n = 0;     // load factor (capacity)
  Policy policy = Policy::hierarchical_greedy;
  Init init = Init::uniform_random;
  std::uint64_t seed = 1;
  int replications = 1;
  std::int64_t warmup = -1;  // -1: model default rule
  Norm norm = Norm::euclidean;
  double beta_override = 0.0;  // <= 0: default for d
  int l0_override = -1;        // < 0: model default
  LeafPick leaf_pick = LeafPick::nearest;
  int threads = 0;  // 0: hardware concurrency
  bool debug_invariants = false;
  bool record_per_period = false;
  bool record_trace = false;
  std::size_t flow_cap = 4096;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct LevelStats {
  int level = 0;
  std::int64_t match_count = 0;
  double total_cost = 0.0;
};

struct StationarityCheck {
  bool computed = false;
  double second_half_mean = 0.0;
  double last_quarter_mean = 0.0;
  double z = 0.0;
  bool ok = true;
};

struct CostReport {
  double mean_cost = 0.0;    // mean match distance over counted periods
  double stderr_cost = 0.0;  // across replications; NaN when reps == 1
  std::vector<LevelStats> per_level;
  std::int64_t transient_estimate = -1;  // max observed T_h, -1 if untracked
  bool transient_complete = true;
  std::int64_t periods = 0;  // periods per replication
  std::int64_t matched = 0;  // counted matches across replications
  std::int64_t warmup_used = 0;
  bool warmup_clamped = false;
  std::int64_t invariant_violations = 0;
  std::string first_violation;
  std::int64_t stockouts = 0;
  double supply_cost_per_period = 0.0;  // capacity model: m/n
  double total_cost_per_period = 0.0;   // capacity model: m/n + mean_cost
  std::vector<double> rep_means;
  std::vector<double> raw_samples;  // rep 0 distances, when recorded
  std::vector<int> raw_levels;      // rep 0 match levels, when recorded
  StationarityCheck stationarity;
};

// Per-period leaf arrivals from replication 0, enough to replay every
// per-hypercube count trajectory offline. supply_leaf stays empty for
// semi-dynamic runs; matched_leaf records where the supply was taken from.
struct ArrivalTrace {
  int d = 0;
  int l0 = 0;
  std::vector<std::int64_t> initial_leaf_counts;
  std::vector<std::uint64_t> demand_leaf;
  std::vector<std::uint64_t> matched_leaf;
  std::vector<std::uint64_t> supply_leaf;
};

CostReport run_static(const SimConfig& cfg);
CostReport run_semi_dynamic(const SimConfig& cfg, ArrivalTrace* trace = nullptr);
CostReport run_fully_dynamic(const SimConfig& cfg, ArrivalTrace* trace = nullptr);
CostReport run_capacity_sim(const SimConfig& cfg);
CostReport run_simulation(const SimConfig& cfg, ArrivalTrace* trace = nullptr);

struct NnEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of the expected distance from a uniform demand point
// to the nearest of m fresh uniform supply points.
NnEstimate estimate_nn_distance(int d, std::int64_t m, std::int64_t samples,
                                std::uint64_t seed,
                                Norm norm = Norm::euclidean);

// Warmup rule for the dynamic engines: max(observed transient, m(3 ln m + 7)).
std::int64_t default_warmup(std::int64_t m, std::int64_t observed_transient);

// Compares the second-half mean against the last-quarter mean via batch
// means; ok when they differ by fewer than 3 standard errors.
StationarityCheck stationarity_check(const std::vector<double>& samples);

}  // namespace smatch
