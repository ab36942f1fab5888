#include "smatch/static_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace smatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatchingResult finish(std::vector<std::pair<int, int>> pairs, double total) {
  MatchingResult r;
  r.pairs = std::move(pairs);
  r.total_cost = total;
  r.avg_cost = r.pairs.empty() ? 0.0 : total / static_cast<double>(r.pairs.size());
  return r;
}

std::vector<int> sorted_order(const std::vector<double>& v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return v[a] < v[b]; });
  return order;
}

}  // namespace

MatchingResult match_line_balanced(const std::vector<double>& supply,
                                   const std::vector<double>& demand) {
  if (supply.size() != demand.size())
    throw std::invalid_argument("match_line_balanced: unequal lengths");
  if (demand.empty())
    throw std::invalid_argument("match_line_balanced: empty input");
  auto so = sorted_order(supply);
  auto de = sorted_order(demand);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(demand.size());
  double total = 0.0;
  for (std::size_t k = 0; k < demand.size(); ++k) {
    pairs.emplace_back(de[k], so[k]);
    total += std::fabs(demand[de[k]] - supply[so[k]]);
  }
  return finish(std::move(pairs), total);
}

MatchingResult match_line_excess(const std::vector<double>& supply,
                                 const std::vector<double>& demand) {
  const std::size_t n = demand.size();
  const std::size_t ns = supply.size();
  if (ns < n)
    throw std::invalid_argument("match_line_excess: fewer supply than demand");
  if (n == 0) throw std::invalid_argument("match_line_excess: empty demand");

  auto so = sorted_order(supply);
  auto de = sorted_order(demand);

  // choice(i,j): true if demand i is matched to supply j, false if supply j
  // is skipped. One bit per DP cell; rows are demands 1..n.
  const std::size_t row_words = (ns + 64) / 64;
  if (row_words > (std::size_t{1} << 25) / std::max<std::size_t>(n, 1))
    throw std::invalid_argument("match_line_excess: instance too large");
  std::vector<std::uint64_t> choice(n * row_words, 0);
  auto set_choice = [&](std::size_t i, std::size_t j) {
    choice[(i - 1) * row_words + j / 64] |= std::uint64_t{1} << (j % 64);
  };
  auto get_choice = [&](std::size_t i, std::size_t j) {
    return (choice[(i - 1) * row_words + j / 64] >> (j % 64)) & 1;
  };

  std::vector<double> prev(ns + 1, 0.0), cur(ns + 1, kInf);
  for (std::size_t i = 1; i <= n; ++i) {
    cur.assign(ns + 1, kInf);
    const double di = demand[de[i - 1]];
    for (std::size_t j = i; j <= ns; ++j) {
      double matched = prev[j - 1] + std::fabs(di - supply[so[j - 1]]);
      double skipped = cur[j - 1];
      if (skipped <= matched) {
        cur[j] = skipped;
      } else {
        cur[j] = matched;
        set_choice(i, j - 1);
      }
    }
    std::swap(prev, cur);
  }

  std::vector<std::pair<int, int>> pairs(n);
  double total = prev[ns];
  std::size_t i = n, j = ns;
  while (i > 0) {
    if (get_choice(i, j - 1)) {
      pairs[i - 1] = {de[i - 1], so[j - 1]};
      --i;
    }
    --j;
  }
  return finish(std::move(pairs), total);
}

double line_excess_cost(std::vector<double> supply,
                        std::vector<double> demand) {
  const std::size_t n = demand.size();
  const std::size_t ns = supply.size();
  if (ns < n)
    throw std::invalid_argument("line_excess_cost: fewer supply than demand");
  if (n == 0) return 0.0;
  std::sort(supply.begin(), supply.end());
  std::sort(demand.begin(), demand.end());
  std::vector<double> prev(ns + 1, 0.0), cur(ns + 1, kInf);
  for (std::size_t i = 1; i <= n; ++i) {
    cur.assign(ns + 1, kInf);
    for (std::size_t j = i; j <= ns; ++j)
      cur[j] = std::min(cur[j - 1],
                        prev[j - 1] + std::fabs(demand[i - 1] - supply[j - 1]));
    std::swap(prev, cur);
  }
  return prev[ns];
}

namespace {

// Dense shortest-augmenting-path assignment (Jonker-Volgenant style) for
// nr demand rows and nc >= nr supply columns. Maintains dual potentials
// u (rows) and v (columns) with all reduced costs nonnegative; v only
// decreases from 0 and only on columns that end up matched, which gives the
// optimality certificate checked below.
class AssignmentSolver {
 public:
  AssignmentSolver(const std::vector<Point>& supply,
                   const std::vector<Point>& demand, Norm norm)
      : supply_(supply), demand_(demand), norm_(norm),
        nr_(demand.size()), nc_(supply.size()) {
    if (nr_ * nc_ <= kCacheCells) {
      cache_.resize(nr_ * nc_);
      for (std::size_t i = 0; i < nr_; ++i)
        for (std::size_t j = 0; j < nc_; ++j)
          cache_[i * nc_ + j] = distance(demand_[i], supply_[j], norm_);
    }
  }

  MatchingResult solve() {
    u_.assign(nr_, 0.0);
    v_.assign(nc_, 0.0);
    col4row_.assign(nr_, -1);
    row4col_.assign(nc_, -1);

    std::vector<double> shortest(nc_);
    std::vector<std::int64_t> path(nc_);
    std::vector<char> sr(nr_), sc(nc_);

    for (std::size_t cur_row = 0; cur_row < nr_; ++cur_row) {
      std::fill(shortest.begin(), shortest.end(), kInf);
      std::fill(path.begin(), path.end(), -1);
      std::fill(sr.begin(), sr.end(), 0);
      std::fill(sc.begin(), sc.end(), 0);

      double min_val = 0.0;
      std::int64_t sink = -1;
      std::size_t i = cur_row;
      while (sink == -1) {
        sr[i] = 1;
        double lowest = kInf;
        std::int64_t low_j = -1;
        for (std::size_t j = 0; j < nc_; ++j) {
          if (sc[j]) continue;
          double r = min_val + cost(i, j) - u_[i] - v_[j];
          if (r < shortest[j]) {
            shortest[j] = r;
            path[j] = static_cast<std::int64_t>(i);
          }
          if (shortest[j] < lowest ||
              (shortest[j] == lowest && row4col_[j] == -1)) {
            lowest = shortest[j];
            low_j = static_cast<std::int64_t>(j);
          }
        }
        min_val = lowest;
        if (low_j == -1 || min_val == kInf)
          throw std::runtime_error("match_exact_flow: infeasible instance");
        auto j = static_cast<std::size_t>(low_j);
        if (row4col_[j] == -1) {
          sink = low_j;
        } else {
          sc[j] = 1;
          i = static_cast<std::size_t>(row4col_[j]);
        }
      }

      u_[cur_row] += min_val;
      for (std::size_t r = 0; r < nr_; ++r) {
        if (!sr[r] || r == cur_row) continue;
        u_[r] += min_val - shortest[static_cast<std::size_t>(col4row_[r])];
      }
      for (std::size_t j = 0; j < nc_; ++j) {
        if (!sc[j]) continue;
        v_[j] -= min_val - shortest[j];
      }

      // Augment along the stored predecessor path.
      std::int64_t j = sink;
      for (;;) {
        std::int64_t r = path[static_cast<std::size_t>(j)];
        row4col_[static_cast<std::size_t>(j)] = r;
        std::swap(col4row_[static_cast<std::size_t>(r)], j);
        if (static_cast<std::size_t>(r) == cur_row) break;
      }
    }

    certify();

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(nr_);
    double total = 0.0;
    for (std::size_t i = 0; i < nr_; ++i) {
      auto j = static_cast<std::size_t>(col4row_[i]);
      pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      total += cost(i, j);
    }
    return finish(std::move(pairs), total);
  }

 private:
  static constexpr std::size_t kCacheCells = std::size_t{1} << 22;

  double cost(std::size_t i, std::size_t j) const {
    if (!cache_.empty()) return cache_[i * nc_ + j];
    return distance(demand_[i], supply_[j], norm_);
  }

  void certify() const {
    const double eps = 1e-7;
    for (std::size_t j = 0; j < nc_; ++j) {
      if (v_[j] > eps) throw std::runtime_error("certify: positive v");
      if (row4col_[j] == -1 && std::fabs(v_[j]) > eps)
        throw std::runtime_error("certify: unmatched column with nonzero v");
    }
    for (std::size_t i = 0; i < nr_; ++i) {
      for (std::size_t j = 0; j < nc_; ++j) {
        double reduced = cost(i, j) - u_[i] - v_[j];
        if (reduced < -eps)
          throw std::runtime_error("certify: negative reduced cost arc");
        if (col4row_[i] == static_cast<std::int64_t>(j) &&
            std::fabs(reduced) > eps)
          throw std::runtime_error("certify: slack on matched arc");
      }
    }
  }

  const std::vector<Point>& supply_;
  const std::vector<Point>& demand_;
  Norm norm_;
  std::size_t nr_, nc_;
  std::vector<double> cache_;
  std::vector<double> u_, v_;
  std::vector<std::int64_t> col4row_, row4col_;
};

}  // namespace

MatchingResult match_exact_flow(const std::vector<Point>& supply,
                                const std::vector<Point>& demand, Norm norm,
                                std::size_t max_demand) {
  if (demand.empty()) throw std::invalid_argument("match_exact_flow: empty demand");
  if (supply.size() < demand.size())
    throw std::invalid_argument("match_exact_flow: fewer supply than demand");
  if (demand.size() > max_demand)
    throw std::invalid_argument("match_exact_flow: demand exceeds solver cap");
  return AssignmentSolver(supply, demand, norm).solve();
}

namespace {

struct BruteState {
  const std::vector<Point>* supply;
  const std::vector<Point>* demand;
  std::vector<std::vector<std::pair<double, int>>> ranked;  // per demand
  std::vector<char> used;
  std::vector<int> assign, best_assign;
  double best = kInf;

  void search(std::size_t i, double cost_so_far) {
    if (cost_so_far >= best) return;  // cannot improve the incumbent
    if (i == demand->size()) {
      best = cost_so_far;
      best_assign = assign;
      return;
    }
    for (const auto& [dist, j] : ranked[i]) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (cost_so_far + dist >= best) break;  // ranked ascending
      used[static_cast<std::size_t>(j)] = 1;
      assign[i] = j;
      search(i + 1, cost_so_far + dist);
      used[static_cast<std::size_t>(j)] = 0;
    }
  }
};

}  // namespace

MatchingResult brute_force_match(const std::vector<Point>& supply,
                                 const std::vector<Point>& demand, Norm norm) {
  if (demand.empty()) throw std::invalid_argument("brute_force_match: empty demand");
  if (demand.size() > 8 || supply.size() > 10)
    throw std::invalid_argument("brute_force_match: size limits exceeded");
  if (supply.size() < demand.size())
    throw std::invalid_argument("brute_force_match: fewer supply than demand");

  BruteState st;
  st.supply = &supply;
  st.demand = &demand;
  st.ranked.resize(demand.size());
  for (std::size_t i = 0; i < demand.size(); ++i) {
    for (std::size_t j = 0; j < supply.size(); ++j)
      st.ranked[i].emplace_back(distance(demand[i], supply[j], norm),
                                static_cast<int>(j));
    std::sort(st.ranked[i].begin(), st.ranked[i].end());
  }
  st.used.assign(supply.size(), 0);
  st.assign.assign(demand.size(), -1);
  st.search(0, 0.0);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(demand.size());
  double total = 0.0;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    pairs.emplace_back(static_cast<int>(i), st.best_assign[i]);
    total += distance(demand[i],
                      supply[static_cast<std::size_t>(st.best_assign[i])], norm);
  }
  return finish(std::move(pairs), total);
}

}  // namespace smatch
