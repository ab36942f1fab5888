#pragma once

#include <cstdint>
#include <vector>

namespace smatch {

// Per-level minimum-supply thresholds for Hierarchical Greedy, plus the
// derived quantities used by the reflected-walk analysis:
//   eta_l  = gamma_{l+1} * 2^{-d}          (l <= l0-1)
//   lower_bounds R_l = floor(gamma_l)       (reflecting floor)
//   upper_bounds R'_l = ceil(eta_l) - 1     (reflecting ceiling)
// Valid schedules satisfy gamma_l in [0, 2^{-d} gamma_{l+1}] for l < l0 and
// gamma_{l0} in [0, total supply).
struct GammaSchedule {
  std::vector<double> gammas;              // levels 0..l0
  std::vector<double> etas;                // levels 0..l0-1
  std::vector<std::int64_t> lower_bounds;  // levels 0..l0
  std::vector<std::int64_t> upper_bounds;  // levels 0..l0-1
  double beta = 0.0;
  int d = 1;

  int root_level() const { return static_cast<int>(gammas.size()) - 1; }

  // Throws std::invalid_argument if the schedule violates its constraints
  // (total_supply < 0 skips the root-bound check).
  void validate(std::int64_t total_supply = -1) const;
};

// All-zero thresholds: matches each demand at its lowest supplied ancestor.
GammaSchedule gamma_schedule_zero(int d, int l0);

// Thresholds for the fully dynamic model with m supply units:
//   gamma_l = m 2^{-(l0-l)d} - sum_{l'=l}^{l0} beta^{l'} 2^{-d(l'-l)},
// which makes the slack eta_l - gamma_l equal beta^l exactly at every level.
// Throws if any gamma_l < 0 (m too small for the chosen l0/beta).
GammaSchedule gamma_schedule_fully_dynamic(int d, std::int64_t m, int l0,
                                           double beta);

// Depth defaults: for the fully dynamic model, d >= 2 uses the largest l0
// with 2^{d l0} <= m/4 and d = 1 the largest with 2^{l0} <= m/(1+log2 m);
// the semi-dynamic model uses the largest l0 with 2^{d l0} <= N.
int default_l0_fully_dynamic(int d, std::int64_t m);
int default_l0_semi_dynamic(int d, std::int64_t n_periods);
double default_beta(int d);  // 2.0 for d = 1, 2.01 otherwise

}  // namespace smatch
