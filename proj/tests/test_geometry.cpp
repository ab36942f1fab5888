#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdint>

#include "smatch/geometry.hpp"
#include "smatch/rng.hpp"

using namespace smatch;

TEST_CASE("hierarchy sizes follow the dyadic formulas") {
  Hierarchy h21(2, 1);
  CHECK(h21.leaf_count() == 4);
  CHECK(h21.node_count() == 5);

  Hierarchy h13(1, 3);
  CHECK(h13.cells_at(0) == 8);
  CHECK(h13.cells_at(1) == 4);
  CHECK(h13.cells_at(2) == 2);
  CHECK(h13.cells_at(3) == 1);

  // d=3, l0=2: evaluate 2^{d(l0-l)} and 2^{-(l0-l)} independently.
  Hierarchy h32(3, 2);
  CHECK(h32.leaf_count() == static_cast<std::uint64_t>(std::pow(2.0, 3 * 2)));
  CHECK(h32.side_length(0) == doctest::Approx(std::pow(2.0, -2)));
  std::uint64_t nodes = 0;
  for (int l = 0; l <= 2; ++l)
    nodes += static_cast<std::uint64_t>(std::pow(2.0, 3 * (2 - l)));
  CHECK(h32.node_count() == nodes);
}

TEST_CASE("hierarchy construction rejects bad arguments") {
  CHECK_THROWS_AS(Hierarchy(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Hierarchy(-2, 1), std::invalid_argument);
  CHECK_THROWS_AS(Hierarchy(1, -1), std::invalid_argument);
  CHECK_THROWS_AS(Hierarchy(2, 13, /*node_cap=*/1000), std::invalid_argument);
}

TEST_CASE("leaf_of uses half-open cells with the last cell closed") {
  Hierarchy h(1, 2);
  CHECK(h.leaf_of({0.30}).index == std::vector<std::uint32_t>{1});
  CHECK(h.leaf_of({1.0}).index == std::vector<std::uint32_t>{3});

  Hierarchy h2(2, 1);
  CHECK(h2.leaf_of({0.9, 0.1}).index == std::vector<std::uint32_t>{1, 0});

  CHECK_THROWS_AS(h.leaf_of({1.5}), std::invalid_argument);
  CHECK_THROWS_AS(h.leaf_of({-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(h2.leaf_of({0.5}), std::invalid_argument);  // dim mismatch
}

TEST_CASE("ancestor_of shifts per-axis coordinates") {
  Hierarchy h(1, 3);
  HypercubeId leaf{0, {5}};
  CHECK(h.ancestor_of(leaf, 1).index == std::vector<std::uint32_t>{2});
  CHECK(h.ancestor_of(leaf, 0) == leaf);

  Hierarchy h2(2, 2);
  HypercubeId leaf2{0, {3, 1}};
  CHECK(h2.ancestor_of(leaf2, 2).index == std::vector<std::uint32_t>{0, 0});
  CHECK(h2.ancestor_of(leaf2, 1).index == std::vector<std::uint32_t>{1, 0});
  CHECK_THROWS_AS(h2.ancestor_of(leaf2, 3), std::invalid_argument);
  CHECK_THROWS_AS(h2.ancestor_of(h2.ancestor_of(leaf2, 1), 1),
                  std::invalid_argument);
}

TEST_CASE("ancestors compose: shifting twice equals shifting once") {
  Rng rng(11, 0);
  for (int d = 1; d <= 3; ++d) {
    Hierarchy h(d, 4);
    for (int i = 0; i < 200; ++i) {
      auto leaf = h.leaf_of(sample_point(rng, d));
      for (int l = 0; l < 4; ++l) {
        for (int lp = l + 1; lp <= 4; ++lp) {
          auto direct = h.ancestor_of(leaf, lp);
          auto via = h.ancestor_of(leaf, l);
          for (int k = 0; k < d; ++k)
            CHECK(direct.index[k] == (via.index[k] >> (lp - l)));
        }
      }
    }
  }
}

TEST_CASE("distance under the three norms") {
  CHECK(distance({0.0, 0.0}, {0.6, 0.8}) == doctest::Approx(1.0));
  CHECK(distance({0.2}, {0.7}) == doctest::Approx(0.5));
  CHECK(distance({0.0, 0.0}, {0.3, 0.4}, Norm::l1) == doctest::Approx(0.7));
  CHECK(distance({0.0, 0.0}, {0.3, 0.4}, Norm::linf) == doctest::Approx(0.4));
  CHECK_THROWS_AS(distance({0.1}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("leaf_of partitions the cube: the claimed cell contains the point") {
  Rng rng(12, 0);
  for (int d = 1; d <= 3; ++d) {
    Hierarchy h(d, 4);
    double lo[8], hi[8];
    for (int i = 0; i < 33000; ++i) {
      Point p = sample_point(rng, d);
      auto leaf = h.leaf_of(p);
      std::uint64_t lin = h.linear_from_level_axes(leaf.index.data(), 0);
      REQUIRE(lin < h.leaf_count());
      h.cell_bounds(leaf.index.data(), 0, lo, hi);
      for (int k = 0; k < d; ++k) {
        REQUIRE(p[k] >= lo[k]);
        REQUIRE(p[k] < hi[k]);
      }
      std::uint32_t axes[8];
      h.axes_of_linear(lin, 0, axes);
      for (int k = 0; k < d; ++k) REQUIRE(axes[k] == leaf.index[k]);
    }
  }
}

TEST_CASE("cell diameter bounds the distance between points in one cell") {
  Rng rng(13, 0);
  Hierarchy h(2, 3);
  for (int l = 0; l <= 3; ++l) {
    double cap = h.cell_diameter(l);
    CHECK(cap == doctest::Approx(std::sqrt(2.0) * h.side_length(l)));
    double s = h.side_length(l);
    for (int i = 0; i < 500; ++i) {
      double ox = static_cast<double>(rng.below(h.cells_per_axis(l))) * s;
      double oy = static_cast<double>(rng.below(h.cells_per_axis(l))) * s;
      Point a{ox + rng.uniform01() * s, oy + rng.uniform01() * s};
      Point b{ox + rng.uniform01() * s, oy + rng.uniform01() * s};
      REQUIRE(distance(a, b) <= cap + 1e-12);
    }
  }
}
