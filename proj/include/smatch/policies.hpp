#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smatch/gamma.hpp"
#include "smatch/supply_tree.hpp"

namespace smatch {

enum class LeafPick { nearest, last_inserted };

// One matching decision: the supply point used, the leaf it came from, the
// level at which the match happened, and the realized distance. The level is
// always <= l0 and the distance is capped by the level-l cell diameter.
struct MatchDecision {
  Point supply_point;
  HypercubeId leaf;
  int level = 0;
  double distance = 0.0;
};

// Tracks the two running invariants of Hierarchical Greedy:
//  - boundary respect: once n_h >= floor(gamma_l) first holds (period T_h),
//    the count never drops below floor(gamma_l) again;
//  - no outside use: supply leaves a hypercube to serve demand located
//    outside it only while n_h >= ceil(eta_l).
// Attach to a SupplyTree via set_observer; hg_match reports outside
// removals directly.
class HgInvariantMonitor : public CountObserver {
 public:
  HgInvariantMonitor(const Hierarchy& hierarchy, const GammaSchedule& schedule);

  void begin_period(std::int64_t t) { period_ = t; }
  // Records T_h for nodes already above their floor before period 1.
  void capture_initial(const SupplyTree& tree);

  void on_count(int level, std::uint64_t cell, std::int64_t count) override;
  void note_outside_removal(int level, std::uint64_t cell,
                            std::int64_t count_before);

  std::int64_t violations() const { return violations_; }
  const std::string& first_violation() const { return first_violation_; }
  // Largest T_h among nodes that reached their floor; -1 if none tracked.
  std::int64_t transient_max() const { return transient_max_; }
  bool all_reached() const;

 private:
  const Hierarchy* hier_;
  const GammaSchedule* schedule_;
  std::vector<std::vector<std::int64_t>> reach_time_;  // -1 until reached
  std::int64_t period_ = 1;
  std::int64_t violations_ = 0;
  std::int64_t transient_max_ = -1;
  std::string first_violation_;
};

struct HgOptions {
  LeafPick leaf_pick = LeafPick::nearest;
  Norm norm = Norm::euclidean;
  HgInvariantMonitor* monitor = nullptr;
};

// Hierarchical Greedy: matches the arriving demand at the lowest level whose
// ancestors are all above their gamma thresholds, descending to a leaf by
// best-supplied child. Removes the chosen supply unit from the tree. Never
// takes supply from a hypercube at or below its threshold.
MatchDecision hg_match(SupplyTree& tree, const GammaSchedule& schedule,
                       const Point& demand, const HgOptions& opts = {});

// Inserts an arriving supply unit, incrementing its leaf-to-root path.
void hg_insert_supply(SupplyTree& tree, const Point& p);

// Baseline: exact nearest available supply unit (branch-and-bound over the
// hierarchy), removed from the tree.
MatchDecision greedy_match(SupplyTree& tree, const Point& demand,
                           Norm norm = Norm::euclidean);

// Lowest level at which the two points share a hypercube.
int co_level(const Hierarchy& hierarchy, const Point& a, const Point& b);

}  // namespace smatch
