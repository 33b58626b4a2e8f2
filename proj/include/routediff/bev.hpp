#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "routediff/geometry.hpp"

namespace routediff {

// Ego-centered raster frame. Ego +x (forward) maps to decreasing row index
// ("up"), ego +y (left) to decreasing column index.
struct GridSpec {
  int height_cells = 128;
  int width_cells = 128;
  double cell_size = 0.5;  // meters per cell
  int ego_row = 96;
  int ego_col = 64;

  bool operator==(const GridSpec&) const = default;
};

void validate_grid_spec(const GridSpec& spec);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // [0, 1]
};

struct PointCloud {
  std::vector<LidarPoint> points;
};

// Multi-channel raster, channel-first row-major, every value in [0, 1].
struct BevGrid {
  GridSpec spec;
  int channels = 0;
  std::vector<double> data;

  double at(int c, int row, int col) const {
    return data[(static_cast<std::size_t>(c) * spec.height_cells + row) * spec.width_cells + col];
  }
  double& at(int c, int row, int col) {
    return data[(static_cast<std::size_t>(c) * spec.height_cells + row) * spec.width_cells + col];
  }

  static BevGrid zeros(const GridSpec& spec, int channels);

  // Raw payload dump (channel-first row-major float64, little endian).
  void write(std::ostream& os) const;
  static BevGrid read(std::istream& is);
};

struct LidarRasterParams {
  double z_min = -2.5;
  double z_max = 1.5;
  int density_cap = 16;
};

struct LidarRaster {
  BevGrid grid;
  std::size_t rejected_points = 0;  // non-finite points dropped
};

// Cell containing p, or nullopt when p falls outside the grid.
std::optional<Cell> world_to_cell(Vec2 p, const GridSpec& spec);
// Center of a cell in ego coordinates (inverse of world_to_cell up to half a cell).
Vec2 cell_center(Cell cell, const GridSpec& spec);

// 3 channels: max-height (affine [z_min, z_max] -> [0,1], clipped), mean
// intensity, log-density log(1+n)/log(1+cap) clipped to 1. Empty cells stay 0.
LidarRaster rasterize_lidar(const PointCloud& cloud, const GridSpec& spec,
                            const LidarRasterParams& params = {});

// 1 channel: supercover line rasterization of the waypoint chain (no diagonal
// gaps); cells crossed by any segment are set to 1.
BevGrid rasterize_history(const Polyline& history, const GridSpec& spec);

// 1 channel: cell = 1 iff its center lies within corridor_halfwidth of the
// polyline (point-to-segment distance).
BevGrid rasterize_route(const Polyline& route, const GridSpec& spec, double corridor_halfwidth);

// Channel order: [height, intensity, density, history, route]. All inputs
// must share one GridSpec.
BevGrid assemble_input(const BevGrid& lidar3, const BevGrid& history1, const BevGrid& route1);

// All grid cells crossed by segment [a, b] (supercover), in-bounds only.
std::vector<Cell> supercover_cells(Vec2 a, Vec2 b, const GridSpec& spec);

}  // namespace routediff
