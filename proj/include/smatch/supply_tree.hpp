#pragma once

#include <cstdint>
#include <vector>

#include "smatch/geometry.hpp"

namespace smatch {

// Receives every per-node count change; used by the invariant monitor.
struct CountObserver {
  virtual ~CountObserver() = default;
  virtual void on_count(int level, std::uint64_t cell,
                        std::int64_t count) = 0;
};

// Supply state over a Hierarchy: the count n_h for every node plus the list
// of supply points per leaf. Parent counts equal the sum over children at
// all times; the root count is the total supply in the system. Single
// writer; distinct simulations own distinct trees.
class SupplyTree {
 public:
  explicit SupplyTree(const Hierarchy& hierarchy);

  const Hierarchy& hierarchy() const { return *hier_; }

  std::int64_t count(int level, std::uint64_t cell) const {
    return counts_[static_cast<std::size_t>(level)][cell];
  }
  std::int64_t root_count() const { return counts_.back()[0]; }

  void insert(const Point& p);

  // Removes the point held in `slot` of the given leaf (swap-remove) and
  // decrements counts along the leaf-to-root path. Returns the point.
  Point remove_at(std::uint64_t leaf, std::size_t slot);

  const std::vector<std::uint32_t>& leaf_slots(std::uint64_t leaf) const {
    return leaf_points_[leaf];
  }
  const Point& point(std::uint32_t arena_index) const {
    return arena_[arena_index];
  }
  // Monotone insertion stamp; higher means inserted later.
  std::uint64_t stamp(std::uint32_t arena_index) const {
    return stamps_[arena_index];
  }

  void set_observer(CountObserver* observer) { observer_ = observer; }

  // Recomputes parent sums bottom-up; false if any node disagrees.
  bool check_parent_sums() const;

 private:
  void bump_path(const std::uint32_t* leaf_axes, std::int64_t delta);

  const Hierarchy* hier_;
  std::vector<std::vector<std::int64_t>> counts_;      // [level][cell]
  std::vector<std::vector<std::uint32_t>> leaf_points_;  // arena slots
  std::vector<Point> arena_;
  std::vector<std::uint64_t> stamps_;
  std::vector<std::uint32_t> free_slots_;
  std::uint64_t next_stamp_ = 0;
  CountObserver* observer_ = nullptr;
};

}  // namespace smatch
