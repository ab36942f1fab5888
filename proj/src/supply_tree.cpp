#include "smatch/supply_tree.hpp"

#include <stdexcept>
#include <utility>

namespace smatch {

namespace {
constexpr int kMaxDim = 16;
}

SupplyTree::SupplyTree(const Hierarchy& hierarchy) : hier_(&hierarchy) {
  if (hierarchy.dim() > kMaxDim)
    throw std::invalid_argument("supply tree: dimension too large");
  counts_.resize(static_cast<std::size_t>(hierarchy.num_levels()));
  for (int l = 0; l <= hierarchy.root_level(); ++l)
    counts_[static_cast<std::size_t>(l)].assign(hierarchy.cells_at(l), 0);
  leaf_points_.resize(hierarchy.leaf_count());
}

void SupplyTree::bump_path(const std::uint32_t* leaf_axes, std::int64_t delta) {
  for (int l = 0; l <= hier_->root_level(); ++l) {
    std::uint64_t cell = hier_->linear_at_level(leaf_axes, l);
    std::int64_t n = (counts_[static_cast<std::size_t>(l)][cell] += delta);
    if (observer_) observer_->on_count(l, cell, n);
  }
}

void SupplyTree::insert(const Point& p) {
  std::uint32_t axes[kMaxDim];
  hier_->leaf_axes_of(p, axes);
  std::uint64_t leaf = hier_->linear_at_level(axes, 0);

  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
    arena_[slot] = p;
    stamps_[slot] = next_stamp_++;
  } else {
    slot = static_cast<std::uint32_t>(arena_.size());
    arena_.push_back(p);
    stamps_.push_back(next_stamp_++);
  }
  leaf_points_[leaf].push_back(slot);
  bump_path(axes, +1);
}

Point SupplyTree::remove_at(std::uint64_t leaf, std::size_t slot) {
  auto& list = leaf_points_[leaf];
  if (slot >= list.size())
    throw std::out_of_range("supply tree: leaf slot out of range");
  std::uint32_t arena_index = list[slot];
  list[slot] = list.back();
  list.pop_back();
  Point p = std::move(arena_[arena_index]);
  free_slots_.push_back(arena_index);

  std::uint32_t axes[kMaxDim];
  hier_->axes_of_linear(leaf, 0, axes);
  bump_path(axes, -1);
  return p;
}

bool SupplyTree::check_parent_sums() const {
  for (std::uint64_t leaf = 0; leaf < hier_->leaf_count(); ++leaf)
    if (counts_[0][leaf] !=
        static_cast<std::int64_t>(leaf_points_[leaf].size()))
      return false;
  std::uint32_t axes[kMaxDim];
  for (int l = 1; l <= hier_->root_level(); ++l) {
    for (std::uint64_t cell = 0; cell < hier_->cells_at(l); ++cell) {
      hier_->axes_of_linear(cell, l, axes);
      std::int64_t sum = 0;
      const int d = hier_->dim();
      for (std::uint32_t child = 0; child < (1u << d); ++child) {
        std::uint32_t child_axes[kMaxDim];
        for (int k = 0; k < d; ++k)
          child_axes[k] = (axes[k] << 1) | ((child >> k) & 1u);
        sum += counts_[static_cast<std::size_t>(l - 1)]
                      [hier_->linear_from_level_axes(child_axes, l - 1)];
      }
      if (sum != counts_[static_cast<std::size_t>(l)][cell]) return false;
    }
  }
  return true;
}

}  // namespace smatch
