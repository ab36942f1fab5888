#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smatch {

class Rng;

// A location in the unit hypercube [0,1]^d.
using Point = std::vector<double>;

enum class Norm { euclidean, l1, linf };

Norm norm_from_string(const std::string& name);
const char* to_string(Norm norm);

// Distance between two points of equal dimension under the selected norm.
// Throws std::invalid_argument on dimension mismatch.
double distance(const Point& a, const Point& b, Norm norm = Norm::euclidean);

Point sample_point(Rng& rng, int d);

// Identifies one cell of the dyadic partition: `level` in [0, l0] and one
// integer coordinate per axis, each in [0, 2^{l0-level}).
struct HypercubeId {
  int level = 0;
  std::vector<std::uint32_t> index;

  bool operator==(const HypercubeId&) const = default;
};

// The nested dyadic partitions of [0,1]^d, organized as a 2^d-ary tree.
// Level l0 is the root cube; level 0 is the finest partition (the leaves).
// Level l has 2^{d(l0-l)} cells of side 2^{-(l0-l)}. Immutable after
// construction and shareable across threads.
class Hierarchy {
 public:
  static constexpr std::uint64_t kDefaultNodeCap = std::uint64_t{1} << 24;

  Hierarchy(int d, int l0, std::uint64_t node_cap = kDefaultNodeCap);

  int dim() const { return d_; }
  int root_level() const { return l0_; }
  int num_levels() const { return l0_ + 1; }

  std::uint64_t cells_per_axis(int level) const;
  std::uint64_t cells_at(int level) const;
  std::uint64_t leaf_count() const { return cells_at(0); }
  std::uint64_t node_count() const { return node_count_; }
  double side_length(int level) const;
  // Maximum distance between two points of a level-`level` cell.
  double cell_diameter(int level, Norm norm = Norm::euclidean) const;

  // Leaf containing p. Cells are half-open per axis except the last cell,
  // which is closed so that coordinate 1.0 has a home.
  HypercubeId leaf_of(const Point& p) const;

  // Level-l ancestor of a leaf; per-axis coordinates right-shifted by l.
  // ancestor_of(leaf, 0) == leaf; level l0 is the root.
  HypercubeId ancestor_of(const HypercubeId& leaf, int level) const;

  // Flat-index helpers used by the simulation loop. Axis arrays have dim()
  // entries at leaf resolution; linear indices are row-major per level.
  void leaf_axes_of(const Point& p, std::uint32_t* axes) const;
  std::uint64_t linear_at_level(const std::uint32_t* leaf_axes,
                                int level) const;
  std::uint64_t linear_from_level_axes(const std::uint32_t* level_axes,
                                       int level) const;
  void axes_of_linear(std::uint64_t linear, int level,
                      std::uint32_t* level_axes) const;
  std::uint64_t leaf_linear(const Point& p) const;
  // Coordinate bounds [lo, hi) of a cell given its level-resolution axes.
  void cell_bounds(const std::uint32_t* level_axes, int level, double* lo,
                   double* hi) const;

 private:
  int d_;
  int l0_;
  std::uint64_t node_count_;
};

Hierarchy build_hierarchy(int d, int l0,
                          std::uint64_t node_cap = Hierarchy::kDefaultNodeCap);

}  // namespace smatch
