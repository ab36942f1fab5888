#include "smatch/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "smatch/rng.hpp"

namespace smatch {

Norm norm_from_string(const std::string& name) {
  if (name == "euclidean" || name == "l2") return Norm::euclidean;
  if (name == "l1") return Norm::l1;
  if (name == "linf") return Norm::linf;
  throw std::invalid_argument("unknown norm: " + name);
}

const char* to_string(Norm norm) {
  switch (norm) {
    case Norm::euclidean: return "euclidean";
    case Norm::l1: return "l1";
    case Norm::linf: return "linf";
  }
  return "?";
}

double distance(const Point& a, const Point& b, Norm norm) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: dimension mismatch");
  double acc = 0.0;
  switch (norm) {
    case Norm::euclidean:
      for (std::size_t k = 0; k < a.size(); ++k) {
        double g = a[k] - b[k];
        acc += g * g;
      }
      return std::sqrt(acc);
    case Norm::l1:
      for (std::size_t k = 0; k < a.size(); ++k) acc += std::fabs(a[k] - b[k]);
      return acc;
    case Norm::linf:
      for (std::size_t k = 0; k < a.size(); ++k)
        acc = std::max(acc, std::fabs(a[k] - b[k]));
      return acc;
  }
  return 0.0;
}

Point sample_point(Rng& rng, int d) {
  Point p(static_cast<std::size_t>(d));
  for (auto& x : p) x = rng.uniform01();
  return p;
}

Hierarchy::Hierarchy(int d, int l0, std::uint64_t node_cap) : d_(d), l0_(l0) {
  if (d <= 0) throw std::invalid_argument("hierarchy: d must be >= 1");
  if (l0 < 0) throw std::invalid_argument("hierarchy: l0 must be >= 0");
  if (static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(l0) >= 63)
    throw std::invalid_argument("hierarchy: 2^(d*l0) overflows");
  node_count_ = 0;
  for (int l = 0; l <= l0_; ++l) {
    node_count_ += cells_at(l);
    if (node_count_ > node_cap)
      throw std::invalid_argument("hierarchy: node count exceeds cap");
  }
}

std::uint64_t Hierarchy::cells_per_axis(int level) const {
  return std::uint64_t{1} << (l0_ - level);
}

std::uint64_t Hierarchy::cells_at(int level) const {
  return std::uint64_t{1} << (static_cast<std::uint64_t>(d_) * (l0_ - level));
}

double Hierarchy::side_length(int level) const {
  return std::ldexp(1.0, -(l0_ - level));
}

double Hierarchy::cell_diameter(int level, Norm norm) const {
  double s = side_length(level);
  switch (norm) {
    case Norm::euclidean: return std::sqrt(static_cast<double>(d_)) * s;
    case Norm::l1: return static_cast<double>(d_) * s;
    case Norm::linf: return s;
  }
  return s;
}

void Hierarchy::leaf_axes_of(const Point& p, std::uint32_t* axes) const {
  if (static_cast<int>(p.size()) != d_)
    throw std::invalid_argument("leaf_of: point dimension mismatch");
  const double scale = std::ldexp(1.0, l0_);
  const std::uint64_t last = cells_per_axis(0) - 1;
  for (int k = 0; k < d_; ++k) {
    double x = p[static_cast<std::size_t>(k)];
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("leaf_of: coordinate outside [0,1]");
    auto a = static_cast<std::uint64_t>(x * scale);
    if (a > last) a = last;  // x == 1.0 folds into the closed last cell
    axes[k] = static_cast<std::uint32_t>(a);
  }
}

HypercubeId Hierarchy::leaf_of(const Point& p) const {
  HypercubeId id;
  id.level = 0;
  id.index.resize(static_cast<std::size_t>(d_));
  leaf_axes_of(p, id.index.data());
  return id;
}

HypercubeId Hierarchy::ancestor_of(const HypercubeId& leaf, int level) const {
  if (leaf.level != 0)
    throw std::invalid_argument("ancestor_of: expected a leaf");
  if (level < 0 || level > l0_)
    throw std::invalid_argument("ancestor_of: level out of range");
  HypercubeId id;
  id.level = level;
  id.index.resize(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k)
    id.index[static_cast<std::size_t>(k)] =
        leaf.index[static_cast<std::size_t>(k)] >> level;
  return id;
}

std::uint64_t Hierarchy::linear_at_level(const std::uint32_t* leaf_axes,
                                         int level) const {
  const std::uint64_t base = cells_per_axis(level);
  std::uint64_t lin = 0;
  for (int k = d_ - 1; k >= 0; --k)
    lin = lin * base + (leaf_axes[k] >> level);
  return lin;
}

std::uint64_t Hierarchy::linear_from_level_axes(const std::uint32_t* level_axes,
                                                int level) const {
  const std::uint64_t base = cells_per_axis(level);
  std::uint64_t lin = 0;
  for (int k = d_ - 1; k >= 0; --k) lin = lin * base + level_axes[k];
  return lin;
}

void Hierarchy::axes_of_linear(std::uint64_t linear, int level,
                               std::uint32_t* level_axes) const {
  const std::uint64_t base = cells_per_axis(level);
  for (int k = 0; k < d_; ++k) {
    level_axes[k] = static_cast<std::uint32_t>(linear % base);
    linear /= base;
  }
}

std::uint64_t Hierarchy::leaf_linear(const Point& p) const {
  std::uint32_t axes[16];
  std::vector<std::uint32_t> big;
  std::uint32_t* a = axes;
  if (d_ > 16) {
    big.resize(static_cast<std::size_t>(d_));
    a = big.data();
  }
  leaf_axes_of(p, a);
  return linear_at_level(a, 0);
}

void Hierarchy::cell_bounds(const std::uint32_t* level_axes, int level,
                            double* lo, double* hi) const {
  const double s = side_length(level);
  for (int k = 0; k < d_; ++k) {
    lo[k] = level_axes[k] * s;
    hi[k] = lo[k] + s;
  }
}

Hierarchy build_hierarchy(int d, int l0, std::uint64_t node_cap) {
  return Hierarchy(d, l0, node_cap);
}

}  // namespace smatch
