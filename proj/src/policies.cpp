#include "smatch/policies.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace smatch {

namespace {
constexpr int kMaxDim = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

HgInvariantMonitor::HgInvariantMonitor(const Hierarchy& hierarchy,
                                       const GammaSchedule& schedule)
    : hier_(&hierarchy), schedule_(&schedule) {
  if (schedule.root_level() != hierarchy.root_level())
    throw std::invalid_argument("monitor: schedule depth mismatch");
  reach_time_.resize(static_cast<std::size_t>(hierarchy.num_levels()));
  for (int l = 0; l <= hierarchy.root_level(); ++l)
    reach_time_[static_cast<std::size_t>(l)].assign(hierarchy.cells_at(l), -1);
}

void HgInvariantMonitor::capture_initial(const SupplyTree& tree) {
  for (int l = 0; l <= hier_->root_level(); ++l) {
    std::int64_t floor_g = schedule_->lower_bounds[static_cast<std::size_t>(l)];
    for (std::uint64_t cell = 0; cell < hier_->cells_at(l); ++cell) {
      if (tree.count(l, cell) >= floor_g) {
        reach_time_[static_cast<std::size_t>(l)][cell] = period_;
        if (period_ > transient_max_) transient_max_ = period_;
      }
    }
  }
}

void HgInvariantMonitor::on_count(int level, std::uint64_t cell,
                                  std::int64_t count) {
  std::int64_t floor_g =
      schedule_->lower_bounds[static_cast<std::size_t>(level)];
  std::int64_t& reached = reach_time_[static_cast<std::size_t>(level)][cell];
  if (reached < 0) {
    if (count >= floor_g) {
      // A mid-period arrival makes the count >= floor(gamma) from the START
      // of the next period, so T_h is period + 1.
      reached = period_ + 1;
      if (reached > transient_max_) transient_max_ = reached;
    }
    return;
  }
  if (count < floor_g) {
    ++violations_;
    if (first_violation_.empty())
      first_violation_ = "boundary respect: level " + std::to_string(level) +
                         " cell " + std::to_string(cell) + " dropped to " +
                         std::to_string(count) + " below floor(gamma)=" +
                         std::to_string(floor_g) + " at period " +
                         std::to_string(period_);
  }
}

void HgInvariantMonitor::note_outside_removal(int level, std::uint64_t cell,
                                              std::int64_t count_before) {
  if (level > hier_->root_level() - 1) return;
  double eta = schedule_->etas[static_cast<std::size_t>(level)];
  if (static_cast<double>(count_before) < std::ceil(eta)) {
    ++violations_;
    if (first_violation_.empty())
      first_violation_ = "no outside use: level " + std::to_string(level) +
                         " cell " + std::to_string(cell) + " had " +
                         std::to_string(count_before) + " < ceil(eta)=" +
                         std::to_string(std::ceil(eta)) + " at period " +
                         std::to_string(period_);
  }
}

bool HgInvariantMonitor::all_reached() const {
  for (const auto& level : reach_time_)
    for (auto t : level)
      if (t < 0) return false;
  return true;
}

namespace {

// Picks a supply unit from the leaf per the configured rule. Ties inside the
// leaf go to the first slot encountered.
std::size_t pick_in_leaf(const SupplyTree& tree, std::uint64_t leaf,
                         const Point& demand, const HgOptions& opts,
                         double* dist_out) {
  const auto& slots = tree.leaf_slots(leaf);
  if (opts.leaf_pick == LeafPick::last_inserted) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < slots.size(); ++s)
      if (tree.stamp(slots[s]) > tree.stamp(slots[best])) best = s;
    *dist_out = distance(demand, tree.point(slots[best]), opts.norm);
    return best;
  }
  std::size_t best = 0;
  double best_dist = kInf;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    double d = distance(demand, tree.point(slots[s]), opts.norm);
    if (d < best_dist) {
      best_dist = d;
      best = s;
    }
  }
  *dist_out = best_dist;
  return best;
}

}  // namespace

MatchDecision hg_match(SupplyTree& tree, const GammaSchedule& schedule,
                       const Point& demand, const HgOptions& opts) {
  const Hierarchy& hier = tree.hierarchy();
  const int l0 = hier.root_level();
  const int d = hier.dim();
  if (schedule.root_level() != l0)
    throw std::invalid_argument("hg_match: schedule depth mismatch");
  if (tree.root_count() < 1)
    throw std::invalid_argument("hg_match: no supply in system");

  std::uint32_t demand_axes[kMaxDim];
  hier.leaf_axes_of(demand, demand_axes);

  // S = { l : n at the level-l ancestor <= gamma_l }; match at 1 + max(S).
  int match_level = 0;
  for (int l = 0; l <= l0; ++l) {
    std::int64_t n = tree.count(l, hier.linear_at_level(demand_axes, l));
    if (static_cast<double>(n) <= schedule.gammas[static_cast<std::size_t>(l)])
      match_level = l + 1;
  }
  if (match_level > l0)
    throw std::runtime_error(
        "hg_match: root undersupplied (gamma_l0 must stay below supply)");

  // Descend from the level-`match_level` ancestor picking the best-supplied
  // child; ties go to the lowest child index.
  std::uint32_t axes[kMaxDim];
  for (int k = 0; k < d; ++k) axes[k] = demand_axes[k] >> match_level;
  for (int l = match_level; l >= 1; --l) {
    std::int64_t best_count = -1;
    std::uint64_t best_linear = 0;
    std::uint32_t best_child = 0;
    for (std::uint32_t child = 0; child < (1u << d); ++child) {
      std::uint32_t child_axes[kMaxDim];
      for (int k = 0; k < d; ++k)
        child_axes[k] = (axes[k] << 1) | ((child >> k) & 1u);
      std::uint64_t lin = hier.linear_from_level_axes(child_axes, l - 1);
      std::int64_t n = tree.count(l - 1, lin);
      if (n > best_count || (n == best_count && lin < best_linear)) {
        best_count = n;
        best_linear = lin;
        best_child = child;
      }
    }
    for (int k = 0; k < d; ++k)
      axes[k] = (axes[k] << 1) | ((best_child >> k) & 1u);
  }

  std::uint64_t leaf = hier.linear_from_level_axes(axes, 0);
  if (tree.count(0, leaf) <= 0)
    throw std::runtime_error("hg_match: descent reached an empty leaf");

  if (opts.monitor) {
    // Only well-supplied regions may serve outside demand: every node on
    // the removal path not containing the demand must hold >= ceil(eta).
    for (int l = 0; l < l0; ++l) {
      bool demand_inside = true;
      for (int k = 0; k < d; ++k)
        if ((axes[k] >> l) != (demand_axes[k] >> l)) {
          demand_inside = false;
          break;
        }
      if (!demand_inside)
        opts.monitor->note_outside_removal(
            l, hier.linear_at_level(axes, l),
            tree.count(l, hier.linear_at_level(axes, l)));
    }
  }

  double dist = 0.0;
  std::size_t slot = pick_in_leaf(tree, leaf, demand, opts, &dist);

  MatchDecision decision;
  decision.supply_point = tree.remove_at(leaf, slot);
  decision.leaf.level = 0;
  decision.leaf.index.assign(axes, axes + d);
  decision.level = match_level;
  decision.distance = dist;
  return decision;
}

void hg_insert_supply(SupplyTree& tree, const Point& p) { tree.insert(p); }

namespace {

// Smallest possible distance from p to the closed cell with the given
// level-resolution axes.
double cell_lower_bound(const Hierarchy& hier, const Point& p,
                        const std::uint32_t* level_axes, int level,
                        Norm norm) {
  const double s = hier.side_length(level);
  double acc = 0.0;
  for (int k = 0; k < hier.dim(); ++k) {
    double lo = level_axes[k] * s;
    double hi = lo + s;
    double g = 0.0;
    if (p[static_cast<std::size_t>(k)] < lo) g = lo - p[static_cast<std::size_t>(k)];
    else if (p[static_cast<std::size_t>(k)] > hi) g = p[static_cast<std::size_t>(k)] - hi;
    switch (norm) {
      case Norm::euclidean: acc += g * g; break;
      case Norm::l1: acc += g; break;
      case Norm::linf: acc = std::max(acc, g); break;
    }
  }
  return norm == Norm::euclidean ? std::sqrt(acc) : acc;
}

struct SearchNode {
  double bound;
  int level;
  std::uint64_t cell;
  bool operator>(const SearchNode& o) const {
    if (bound != o.bound) return bound > o.bound;
    if (level != o.level) return level > o.level;
    return cell > o.cell;
  }
};

}  // namespace

MatchDecision greedy_match(SupplyTree& tree, const Point& demand, Norm norm) {
  const Hierarchy& hier = tree.hierarchy();
  const int d = hier.dim();
  if (tree.root_count() < 1)
    throw std::invalid_argument("greedy_match: no supply in system");

  std::priority_queue<SearchNode, std::vector<SearchNode>,
                      std::greater<SearchNode>>
      frontier;
  frontier.push({0.0, hier.root_level(), 0});

  double best_dist = kInf;
  std::uint64_t best_leaf = 0;
  std::size_t best_slot = 0;

  std::uint32_t axes[kMaxDim];
  while (!frontier.empty()) {
    SearchNode node = frontier.top();
    frontier.pop();
    if (node.bound >= best_dist) break;
    if (node.level == 0) {
      const auto& slots = tree.leaf_slots(node.cell);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        double dist = distance(demand, tree.point(slots[s]), norm);
        if (dist < best_dist) {
          best_dist = dist;
          best_leaf = node.cell;
          best_slot = s;
        }
      }
      continue;
    }
    hier.axes_of_linear(node.cell, node.level, axes);
    for (std::uint32_t child = 0; child < (1u << d); ++child) {
      std::uint32_t child_axes[kMaxDim];
      for (int k = 0; k < d; ++k)
        child_axes[k] = (axes[k] << 1) | ((child >> k) & 1u);
      std::uint64_t lin = hier.linear_from_level_axes(child_axes, node.level - 1);
      if (tree.count(node.level - 1, lin) <= 0) continue;
      double bound =
          cell_lower_bound(hier, demand, child_axes, node.level - 1, norm);
      if (bound < best_dist) frontier.push({bound, node.level - 1, lin});
    }
  }

  MatchDecision decision;
  std::uint32_t leaf_axes[kMaxDim];
  hier.axes_of_linear(best_leaf, 0, leaf_axes);
  decision.supply_point = tree.remove_at(best_leaf, best_slot);
  decision.leaf.level = 0;
  decision.leaf.index.assign(leaf_axes, leaf_axes + d);
  decision.level = co_level(hier, demand, decision.supply_point);
  decision.distance = best_dist;
  return decision;
}

int co_level(const Hierarchy& hier, const Point& a, const Point& b) {
  std::uint32_t ax[kMaxDim], bx[kMaxDim];
  hier.leaf_axes_of(a, ax);
  hier.leaf_axes_of(b, bx);
  int level = 0;
  for (int k = 0; k < hier.dim(); ++k) {
    int bits = std::bit_width(ax[k] ^ bx[k]);
    if (bits > level) level = bits;
  }
  return level;
}

}  // namespace smatch
