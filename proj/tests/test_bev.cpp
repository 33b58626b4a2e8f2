#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "routediff/bev.hpp"

using namespace routediff;

namespace {

const GridSpec kSpec{};  // 128x128 at 0.5 m, ego at (96, 64)

// Naive per-cell oracle: for every cell, scan the whole cloud from scratch.
BevGrid naive_lidar_oracle(const PointCloud& cloud, const GridSpec& spec,
                           const LidarRasterParams& params) {
  BevGrid grid = BevGrid::zeros(spec, 3);
  for (int row = 0; row < spec.height_cells; ++row) {
    for (int col = 0; col < spec.width_cells; ++col) {
      double max_z = -1e300;
      double intensity_sum = 0.0;
      int count = 0;
      for (const LidarPoint& p : cloud.points) {
        const auto cell = world_to_cell({p.x, p.y}, spec);
        if (!cell || cell->row != row || cell->col != col) continue;
        max_z = std::max(max_z, p.z);
        intensity_sum += p.intensity;
        ++count;
      }
      if (count == 0) continue;
      grid.at(0, row, col) =
          std::clamp((max_z - params.z_min) / (params.z_max - params.z_min), 0.0, 1.0);
      grid.at(1, row, col) = std::clamp(intensity_sum / count, 0.0, 1.0);
      grid.at(2, row, col) =
          std::min(std::log1p(static_cast<double>(count)) / std::log1p(params.density_cap), 1.0);
    }
  }
  return grid;
}

// Cells touched by a segment, found by dense sampling along it.
std::set<std::pair<int, int>> sampled_segment_cells(Vec2 a, Vec2 b, const GridSpec& spec) {
  std::set<std::pair<int, int>> cells;
  const int steps = static_cast<int>(distance(a, b) / (1e-3 * spec.cell_size)) + 2;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const auto cell = world_to_cell(a + (b - a) * t, spec);
    if (cell) cells.insert({cell->row, cell->col});
  }
  return cells;
}

PointCloud random_cloud(Rng& rng, int n) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    cloud.points.push_back({rng.uniform(-20.0, 50.0), rng.uniform(-34.0, 34.0),
                            rng.uniform(-3.0, 2.0), rng.uniform(0.0, 1.0)});
  }
  return cloud;
}

}  // namespace

TEST_CASE("world_to_cell") {
  SUBCASE("ego origin maps to the ego cell") {
    const auto cell = world_to_cell({0.0, 0.0}, kSpec);
    REQUIRE(cell.has_value());
    CHECK(*cell == Cell{96, 64});
  }
  SUBCASE("one cell_size ahead moves one row up") {
    const auto cell = world_to_cell({kSpec.cell_size, 0.0}, kSpec);
    REQUIRE(cell.has_value());
    CHECK(*cell == Cell{95, 64});
  }
  SUBCASE("far point is absent") { CHECK_FALSE(world_to_cell({1000.0, 0.0}, kSpec).has_value()); }
  SUBCASE("inverse of cell-center mapping") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      const Cell cell{rng.uniform_int(0, 127), rng.uniform_int(0, 127)};
      const auto roundtrip = world_to_cell(cell_center(cell, kSpec), kSpec);
      REQUIRE(roundtrip.has_value());
      CHECK(*roundtrip == cell);
    }
  }
}

TEST_CASE("rasterize_lidar") {
  SUBCASE("empty cloud gives an all-zero grid") {
    const LidarRaster out = rasterize_lidar(PointCloud{}, kSpec);
    CHECK(std::all_of(out.grid.data.begin(), out.grid.data.end(),
                      [](double v) { return v == 0.0; }));
  }
  SUBCASE("single point at z_max with full intensity") {
    PointCloud cloud;
    cloud.points.push_back({1.0, 1.0, 1.5, 1.0});
    const LidarRaster out = rasterize_lidar(cloud, kSpec);
    const auto cell = world_to_cell({1.0, 1.0}, kSpec);
    CHECK(out.grid.at(0, cell->row, cell->col) == doctest::Approx(1.0));
    CHECK(out.grid.at(1, cell->row, cell->col) == doctest::Approx(1.0));
    CHECK(out.grid.at(2, cell->row, cell->col) ==
          doctest::Approx(std::log(2.0) / std::log(17.0)));
  }
  SUBCASE("matches the naive per-cell oracle exactly") {
    Rng rng(5);
    const PointCloud cloud = random_cloud(rng, 50);
    const LidarRaster fast = rasterize_lidar(cloud, kSpec);
    const BevGrid slow = naive_lidar_oracle(cloud, kSpec, LidarRasterParams{});
    for (std::size_t i = 0; i < fast.grid.data.size(); ++i) {
      CHECK(fast.grid.data[i] == slow.data[i]);
    }
  }
  SUBCASE("non-finite points are rejected and counted") {
    PointCloud cloud;
    cloud.points.push_back({0.0, 0.0, 0.0, 0.5});
    cloud.points.push_back({std::nan(""), 0.0, 0.0, 0.5});
    cloud.points.push_back({0.0, 0.0, std::nan(""), 0.5});
    const LidarRaster out = rasterize_lidar(cloud, kSpec);
    CHECK(out.rejected_points == 2);
  }
  SUBCASE("permutation of the point order leaves the raster unchanged") {
    Rng rng(9);
    PointCloud cloud = random_cloud(rng, 120);
    const LidarRaster a = rasterize_lidar(cloud, kSpec);
    std::reverse(cloud.points.begin(), cloud.points.end());
    std::swap(cloud.points[3], cloud.points[77]);
    const LidarRaster b = rasterize_lidar(cloud, kSpec);
    for (std::size_t i = 0; i < a.grid.data.size(); ++i) {
      CHECK(a.grid.data[i] == doctest::Approx(b.grid.data[i]).epsilon(1e-12));
    }
  }
  SUBCASE("all outputs stay in [0, 1] for any finite input") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      PointCloud cloud = random_cloud(rng, 80);
      cloud.points.push_back({0.0, 0.0, 100.0, 1.0});   // far above z_max
      cloud.points.push_back({0.5, 0.5, -100.0, 0.0});  // far below z_min
      const LidarRaster out = rasterize_lidar(cloud, kSpec);
      for (double v : out.grid.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("rasterize_history") {
  SUBCASE("straight history along the ego axis marks a contiguous column") {
    Polyline history;
    for (int i = 0; i < 5; ++i) history.points.push_back({-8.0 + 2.0 * i, 0.0});
    const BevGrid grid = rasterize_history(history, kSpec);
    for (int row = 96; row <= 96 + 16; ++row) {
      CHECK(grid.at(0, row, 64) == 1.0);
    }
    double sum = 0.0;
    for (double v : grid.data) sum += v;
    CHECK(sum == doctest::Approx(17.0));  // exactly the 8 m column
  }
  SUBCASE("history entirely off-grid gives all zeros") {
    Polyline history;
    history.points = {{500.0, 500.0}, {502.0, 500.0}};
    const BevGrid grid = rasterize_history(history, kSpec);
    CHECK(std::all_of(grid.data.begin(), grid.data.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("fewer than 2 waypoints is rejected") {
    Polyline history;
    history.points = {{0.0, 0.0}};
    CHECK_THROWS_AS(rasterize_history(history, kSpec), std::invalid_argument);
  }
  SUBCASE("diagonal segments match the dense-sampling supercover oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
      const Vec2 a{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
      const Vec2 b{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
      if (distance(a, b) < 0.1) continue;
      const auto cells = supercover_cells(a, b, kSpec);
      const auto sampled = sampled_segment_cells(a, b, kSpec);
      // Every sampled cell is visited, and the walk adds at most corner cells.
      std::set<std::pair<int, int>> visited;
      for (const Cell& c : cells) visited.insert({c.row, c.col});
      for (const auto& c : sampled) CHECK(visited.count(c) == 1);
      CHECK(visited.size() <= sampled.size() + cells.size() / 4 + 2);
      // 4-connectivity: consecutive cells share an edge.
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const int dr = std::abs(cells[i].row - cells[i - 1].row);
        const int dc = std::abs(cells[i].col - cells[i - 1].col);
        CHECK(dr + dc == 1);
      }
    }
  }
}

TEST_CASE("rasterize_route") {
  SUBCASE("straight route with halfwidth of two cells marks a five-cell band") {
    Polyline route;
    for (int i = 0; i < 10; ++i) route.points.push_back({2.0 * i, 0.0});
    const BevGrid grid = rasterize_route(route, kSpec, 2.0 * kSpec.cell_size);
    // Per-cell distance oracle on a probe row crossing the route.
    for (int col = 0; col < kSpec.width_cells; ++col) {
      const double want =
          point_polyline_distance(cell_center({80, col}, kSpec), route) <= 1.0 ? 1.0 : 0.0;
      CHECK(grid.at(0, 80, col) == want);
    }
    // Band width: ego col +/- 2 cells.
    for (int col = 62; col <= 66; ++col) CHECK(grid.at(0, 80, col) == 1.0);
    CHECK(grid.at(0, 80, 61) == 0.0);
    CHECK(grid.at(0, 80, 67) == 0.0);
  }
  SUBCASE("tiny halfwidth collapses to the line cells through centers") {
    Polyline route;
    route.points = {{0.0, 0.0}, {8.0, 0.0}};  // passes through cell centers
    const BevGrid grid = rasterize_route(route, kSpec, 1e-9);
    double sum = 0.0;
    for (double v : grid.data) sum += v;
    CHECK(sum == doctest::Approx(17.0));
    for (int row = 80; row <= 96; ++row) CHECK(grid.at(0, row, 64) == 1.0);
  }
  SUBCASE("route outside the grid gives all zeros") {
    Polyline route;
    route.points = {{400.0, 400.0}, {410.0, 400.0}};
    const BevGrid grid = rasterize_route(route, kSpec, 3.0);
    CHECK(std::all_of(grid.data.begin(), grid.data.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("random route equals the full per-cell distance oracle") {
    Rng rng(33);
    Polyline route;
    Vec2 p{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    route.points.push_back(p);
    for (int i = 0; i < 8; ++i) {
      p = p + Vec2{rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0)};
      route.points.push_back(p);
    }
    const double halfwidth = 2.7;
    const BevGrid grid = rasterize_route(route, kSpec, halfwidth);
    for (int row = 0; row < kSpec.height_cells; ++row) {
      for (int col = 0; col < kSpec.width_cells; ++col) {
        const double want =
            point_polyline_distance(cell_center({row, col}, kSpec), route) <= halfwidth ? 1.0
                                                                                        : 0.0;
        CHECK(grid.at(0, row, col) == want);
      }
    }
  }
  SUBCASE("degenerate route is rejected") {
    Polyline route;
    route.points = {{1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(rasterize_route(route, kSpec, 3.0), std::invalid_argument);
  }
}

TEST_CASE("assemble_input") {
  Rng rng(44);
  const PointCloud cloud = random_cloud(rng, 60);
  const LidarRaster lidar = rasterize_lidar(cloud, kSpec);
  Polyline history;
  for (int i = 0; i < 5; ++i) history.points.push_back({-8.0 + 2.0 * i, 0.1 * i});
  const BevGrid traj = rasterize_history(history, kSpec);
  Polyline route;
  for (int i = 0; i < 20; ++i) route.points.push_back({-8.0 + 2.0 * i, 0.0});
  const BevGrid map = rasterize_route(route, kSpec, 3.0);

  SUBCASE("channel order and bit-exact slicing") {
    const BevGrid input = assemble_input(lidar.grid, traj, map);
    REQUIRE(input.channels == 5);
    const std::size_t plane = static_cast<std::size_t>(128) * 128;
    for (std::size_t i = 0; i < plane; ++i) {
      CHECK(input.data[0 * plane + i] == lidar.grid.data[i]);
      CHECK(input.data[1 * plane + i] == lidar.grid.data[plane + i]);
      CHECK(input.data[2 * plane + i] == lidar.grid.data[2 * plane + i]);
      CHECK(input.data[3 * plane + i] == traj.data[i]);
      CHECK(input.data[4 * plane + i] == map.data[i]);
    }
  }
  SUBCASE("all-zero inputs give an all-zero stack") {
    const BevGrid z3 = BevGrid::zeros(kSpec, 3);
    const BevGrid z1 = BevGrid::zeros(kSpec, 1);
    const BevGrid input = assemble_input(z3, z1, z1);
    CHECK(std::all_of(input.data.begin(), input.data.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("mismatched specs are rejected") {
    GridSpec other = kSpec;
    other.cell_size = 0.25;
    const BevGrid z1 = BevGrid::zeros(other, 1);
    CHECK_THROWS_AS(assemble_input(lidar.grid, z1, map), std::invalid_argument);
  }
}

TEST_CASE("BevGrid raw payload round-trips") {
  Rng rng(55);
  BevGrid grid = BevGrid::zeros(kSpec, 2);
  for (double& v : grid.data) v = rng.uniform();
  std::stringstream buffer;
  grid.write(buffer);
  const BevGrid loaded = BevGrid::read(buffer);
  CHECK(loaded.spec == grid.spec);
  CHECK(loaded.channels == grid.channels);
  for (std::size_t i = 0; i < grid.data.size(); ++i) CHECK(loaded.data[i] == grid.data[i]);
}
