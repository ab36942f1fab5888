#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smatch/geometry.hpp"

namespace smatch {

// Outcome of an exact matching: every demand index appears exactly once,
// supply indices are distinct, and total_cost is the sum of pair distances.
struct MatchingResult {
  std::vector<std::pair<int, int>> pairs;  // (demand index, supply index)
  double total_cost = 0.0;
  double avg_cost = 0.0;
};

// d=1, |supply| == |demand|: sort both sides and match by rank. Optimal on
// the line with no excess supply.
MatchingResult match_line_balanced(const std::vector<double>& supply,
                                   const std::vector<double>& demand);

// d=1 with excess supply: monotone DP over the sorted sequences,
//   cost(i,j) = min(cost(i,j-1), cost(i-1,j-1) + |demand_i - supply_j|).
// Globally optimal because optimal matchings on a line can be made
// non-crossing.
MatchingResult match_line_excess(const std::vector<double>& supply,
                                 const std::vector<double>& demand);

// Cost-only variant of the line DP (O(N+M) memory, no pair reconstruction).
double line_excess_cost(std::vector<double> supply, std::vector<double> demand);

// Exact min-cost assignment of all demand to distinct supply in any
// dimension, via shortest augmenting paths with dual potentials. Optimality
// is certified after the solve: no arc has negative reduced cost.
// `max_demand` caps the cubic-cost solve.
MatchingResult match_exact_flow(const std::vector<Point>& supply,
                                const std::vector<Point>& demand,
                                Norm norm = Norm::euclidean,
                                std::size_t max_demand = 4096);

// Test oracle: exhaustive search over all injections demand -> supply
// (branches that provably cannot beat the incumbent are cut, which does not
// affect exactness). Limited to |demand| <= 8, |supply| <= 10.
MatchingResult brute_force_match(const std::vector<Point>& supply,
                                 const std::vector<Point>& demand,
                                 Norm norm = Norm::euclidean);

}  // namespace smatch
