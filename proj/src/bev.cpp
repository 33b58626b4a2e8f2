#include "routediff/bev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "binio.hpp"

namespace routediff {

void validate_grid_spec(const GridSpec& spec) {
  if (spec.height_cells <= 0 || spec.width_cells <= 0) {
    throw std::invalid_argument("GridSpec: non-positive grid dimensions");
  }
  if (!(spec.cell_size > 0.0)) {
    throw std::invalid_argument("GridSpec: cell_size must be positive");
  }
  if (spec.ego_row < 0 || spec.ego_row >= spec.height_cells || spec.ego_col < 0 ||
      spec.ego_col >= spec.width_cells) {
    throw std::invalid_argument("GridSpec: ego cell outside grid");
  }
}

BevGrid BevGrid::zeros(const GridSpec& spec, int channels) {
  validate_grid_spec(spec);
  if (channels <= 0) throw std::invalid_argument("BevGrid: channels must be positive");
  BevGrid g;
  g.spec = spec;
  g.channels = channels;
  g.data.assign(static_cast<std::size_t>(channels) * spec.height_cells * spec.width_cells, 0.0);
  return g;
}

void BevGrid::write(std::ostream& os) const {
  binio::write_u32(os, static_cast<std::uint32_t>(channels));
  binio::write_u32(os, static_cast<std::uint32_t>(spec.height_cells));
  binio::write_u32(os, static_cast<std::uint32_t>(spec.width_cells));
  binio::write_f64(os, spec.cell_size);
  binio::write_u32(os, static_cast<std::uint32_t>(spec.ego_row));
  binio::write_u32(os, static_cast<std::uint32_t>(spec.ego_col));
  for (double v : data) binio::write_f64(os, v);
}

BevGrid BevGrid::read(std::istream& is) {
  BevGrid g;
  g.channels = static_cast<int>(binio::read_u32(is, "grid channels"));
  g.spec.height_cells = static_cast<int>(binio::read_u32(is, "grid height"));
  g.spec.width_cells = static_cast<int>(binio::read_u32(is, "grid width"));
  g.spec.cell_size = binio::read_f64(is, "grid cell size");
  g.spec.ego_row = static_cast<int>(binio::read_u32(is, "grid ego row"));
  g.spec.ego_col = static_cast<int>(binio::read_u32(is, "grid ego col"));
  validate_grid_spec(g.spec);
  const std::size_t n =
      static_cast<std::size_t>(g.channels) * g.spec.height_cells * g.spec.width_cells;
  g.data.resize(n);
  for (double& v : g.data) v = binio::read_f64(is, "grid payload");
  return g;
}

std::optional<Cell> world_to_cell(Vec2 p, const GridSpec& spec) {
  validate_grid_spec(spec);
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
  const long row = spec.ego_row - std::lround(p.x / spec.cell_size);
  const long col = spec.ego_col - std::lround(p.y / spec.cell_size);
  if (row < 0 || row >= spec.height_cells || col < 0 || col >= spec.width_cells) {
    return std::nullopt;
  }
  return Cell{static_cast<int>(row), static_cast<int>(col)};
}

Vec2 cell_center(Cell cell, const GridSpec& spec) {
  return {(spec.ego_row - cell.row) * spec.cell_size, (spec.ego_col - cell.col) * spec.cell_size};
}

LidarRaster rasterize_lidar(const PointCloud& cloud, const GridSpec& spec,
                            const LidarRasterParams& params) {
  validate_grid_spec(spec);
  if (!(params.z_max > params.z_min)) {
    throw std::invalid_argument("rasterize_lidar: z_max must exceed z_min");
  }
  if (params.density_cap < 1) {
    throw std::invalid_argument("rasterize_lidar: density_cap must be >= 1");
  }

  const std::size_t cells = static_cast<std::size_t>(spec.height_cells) * spec.width_cells;
  std::vector<double> max_z(cells, -std::numeric_limits<double>::infinity());
  std::vector<double> intensity_sum(cells, 0.0);
  std::vector<int> count(cells, 0);

  LidarRaster out;
  for (const LidarPoint& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity)) {
      ++out.rejected_points;
      continue;
    }
    const auto cell = world_to_cell({p.x, p.y}, spec);
    if (!cell) continue;
    const std::size_t idx = static_cast<std::size_t>(cell->row) * spec.width_cells + cell->col;
    max_z[idx] = std::max(max_z[idx], p.z);
    intensity_sum[idx] += p.intensity;
    ++count[idx];
  }

  out.grid = BevGrid::zeros(spec, 3);
  const double z_span = params.z_max - params.z_min;
  const double log_cap = std::log1p(static_cast<double>(params.density_cap));
  for (std::size_t i = 0; i < cells; ++i) {
    if (count[i] == 0) continue;
    out.grid.data[i] = std::clamp((max_z[i] - params.z_min) / z_span, 0.0, 1.0);
    out.grid.data[cells + i] = std::clamp(intensity_sum[i] / count[i], 0.0, 1.0);
    out.grid.data[2 * cells + i] = std::min(std::log1p(static_cast<double>(count[i])) / log_cap, 1.0);
  }
  return out;
}

std::vector<Cell> supercover_cells(Vec2 a, Vec2 b, const GridSpec& spec) {
  validate_grid_spec(spec);
  // Continuous cell coordinates shifted so cell (i, j) covers [i, i+1) x [j, j+1).
  const double u0 = spec.ego_row - a.x / spec.cell_size + 0.5;
  const double v0 = spec.ego_col - a.y / spec.cell_size + 0.5;
  const double u1 = spec.ego_row - b.x / spec.cell_size + 0.5;
  const double v1 = spec.ego_col - b.y / spec.cell_size + 0.5;

  long i = static_cast<long>(std::floor(u0));
  long j = static_cast<long>(std::floor(v0));
  const long i_end = static_cast<long>(std::floor(u1));
  const long j_end = static_cast<long>(std::floor(v1));
  const double du = u1 - u0;
  const double dv = v1 - v0;
  const long step_i = du > 0.0 ? 1 : (du < 0.0 ? -1 : 0);
  const long step_j = dv > 0.0 ? 1 : (dv < 0.0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_i = inf, t_delta_i = inf;
  double t_max_j = inf, t_delta_j = inf;
  if (step_i != 0) {
    const double boundary = step_i > 0 ? (i + 1.0) : static_cast<double>(i);
    t_max_i = (boundary - u0) / du;
    t_delta_i = 1.0 / std::abs(du);
  }
  if (step_j != 0) {
    const double boundary = step_j > 0 ? (j + 1.0) : static_cast<double>(j);
    t_max_j = (boundary - v0) / dv;
    t_delta_j = 1.0 / std::abs(dv);
  }

  std::vector<Cell> cells;
  const long max_steps = std::abs(i_end - i) + std::abs(j_end - j) + 2;
  for (long step = 0; step < max_steps; ++step) {
    if (i >= 0 && i < spec.height_cells && j >= 0 && j < spec.width_cells) {
      cells.push_back(Cell{static_cast<int>(i), static_cast<int>(j)});
    }
    if (i == i_end && j == j_end) break;
    if (t_max_i < t_max_j) {
      i += step_i;
      t_max_i += t_delta_i;
    } else {
      j += step_j;
      t_max_j += t_delta_j;
    }
  }
  return cells;
}

BevGrid rasterize_history(const Polyline& history, const GridSpec& spec) {
  validate_polyline(history);
  BevGrid grid = BevGrid::zeros(spec, 1);
  for (std::size_t i = 1; i < history.points.size(); ++i) {
    for (const Cell& c : supercover_cells(history.points[i - 1], history.points[i], spec)) {
      grid.at(0, c.row, c.col) = 1.0;
    }
  }
  return grid;
}

BevGrid rasterize_route(const Polyline& route, const GridSpec& spec, double corridor_halfwidth) {
  validate_polyline(route);
  if (!(corridor_halfwidth > 0.0)) {
    throw std::invalid_argument("rasterize_route: corridor_halfwidth must be positive");
  }
  BevGrid grid = BevGrid::zeros(spec, 1);
  // Per-segment bounding box of candidate cells, then an exact distance test
  // against the cell center.
  const double pad_cells = corridor_halfwidth / spec.cell_size + 1.0;
  for (std::size_t s = 1; s < route.points.size(); ++s) {
    const Vec2 a = route.points[s - 1];
    const Vec2 b = route.points[s];
    const double r_a = spec.ego_row - a.x / spec.cell_size;
    const double r_b = spec.ego_row - b.x / spec.cell_size;
    const double c_a = spec.ego_col - a.y / spec.cell_size;
    const double c_b = spec.ego_col - b.y / spec.cell_size;
    const int row_lo = std::max(0, static_cast<int>(std::floor(std::min(r_a, r_b) - pad_cells)));
    const int row_hi = std::min(spec.height_cells - 1,
                                static_cast<int>(std::ceil(std::max(r_a, r_b) + pad_cells)));
    const int col_lo = std::max(0, static_cast<int>(std::floor(std::min(c_a, c_b) - pad_cells)));
    const int col_hi = std::min(spec.width_cells - 1,
                                static_cast<int>(std::ceil(std::max(c_a, c_b) + pad_cells)));
    for (int row = row_lo; row <= row_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) {
        if (grid.at(0, row, col) != 0.0) continue;
        if (point_segment_distance(cell_center({row, col}, spec), a, b) <= corridor_halfwidth) {
          grid.at(0, row, col) = 1.0;
        }
      }
    }
  }
  return grid;
}

BevGrid assemble_input(const BevGrid& lidar3, const BevGrid& history1, const BevGrid& route1) {
  if (lidar3.channels != 3 || history1.channels != 1 || route1.channels != 1) {
    throw std::invalid_argument("assemble_input: expected channel counts 3/1/1, got " +
                                std::to_string(lidar3.channels) + "/" +
                                std::to_string(history1.channels) + "/" +
                                std::to_string(route1.channels));
  }
  if (!(lidar3.spec == history1.spec) || !(lidar3.spec == route1.spec)) {
    throw std::invalid_argument("assemble_input: grids do not share one GridSpec");
  }
  BevGrid out = BevGrid::zeros(lidar3.spec, 5);
  const std::size_t plane =
      static_cast<std::size_t>(lidar3.spec.height_cells) * lidar3.spec.width_cells;
  std::copy(lidar3.data.begin(), lidar3.data.end(), out.data.begin());
  std::copy(history1.data.begin(), history1.data.end(), out.data.begin() + 3 * plane);
  std::copy(route1.data.begin(), route1.data.end(), out.data.begin() + 4 * plane);
  return out;
}

}  // namespace routediff
