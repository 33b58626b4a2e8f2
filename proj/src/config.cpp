#include "routediff/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "routediff/rng.hpp"

namespace routediff {

namespace {

using FieldRef = std::variant<int RunConfig::*, double RunConfig::*, bool RunConfig::*,
                              std::uint64_t RunConfig::*, std::string RunConfig::*>;

struct Field {
  const char* key;
  FieldRef ref;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"grid_height", &RunConfig::grid_height},
      {"grid_width", &RunConfig::grid_width},
      {"cell_size", &RunConfig::cell_size},
      {"ego_row", &RunConfig::ego_row},
      {"ego_col", &RunConfig::ego_col},
      {"z_min", &RunConfig::z_min},
      {"z_max", &RunConfig::z_max},
      {"density_cap", &RunConfig::density_cap},
      {"corridor_halfwidth", &RunConfig::corridor_halfwidth},
      {"history_count", &RunConfig::history_count},
      {"future_count", &RunConfig::future_count},
      {"route_past", &RunConfig::route_past},
      {"route_future", &RunConfig::route_future},
      {"keyframe_spacing", &RunConfig::keyframe_spacing},
      {"jitter_sigma", &RunConfig::jitter_sigma},
      {"point_noise_sigma", &RunConfig::point_noise_sigma},
      {"road_halfwidth", &RunConfig::road_halfwidth},
      {"curb_density", &RunConfig::curb_density},
      {"clutter_points", &RunConfig::clutter_points},
      {"train_count", &RunConfig::train_count},
      {"test_count", &RunConfig::test_count},
      {"schedule_kind", &RunConfig::schedule_kind},
      {"diffusion_steps", &RunConfig::diffusion_steps},
      {"normalize_scale", &RunConfig::normalize_scale},
      {"embed_dim", &RunConfig::embed_dim},
      {"epochs", &RunConfig::epochs},
      {"batch_size", &RunConfig::batch_size},
      {"base_lr", &RunConfig::base_lr},
      {"lambda_road", &RunConfig::lambda_road},
      {"samples_k", &RunConfig::samples_k},
      {"hit_threshold", &RunConfig::hit_threshold},
      {"fde_mean_over_candidates", &RunConfig::fde_mean_over_candidates},
      {"hd_min_over_candidates", &RunConfig::hd_min_over_candidates},
      {"eval_threads", &RunConfig::eval_threads},
      {"mask_history", &RunConfig::mask_history},
      {"mask_route", &RunConfig::mask_route},
      {"seed", &RunConfig::seed},
      {"train_dataset", &RunConfig::train_dataset},
      {"test_dataset", &RunConfig::test_dataset},
      {"checkpoint_path", &RunConfig::checkpoint_path},
  };
  return table;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const Field& f : fields()) {
    os << f.key << " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, double>) {
            os << format_double(this->*member);
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (this->*member ? "true" : "false");
          } else {
            os << this->*member;
          }
        },
        f.ref);
    os << "\n";
  }
  return os.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> assigned;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (key == f.key) {
        field = &f;
        break;
      }
    }
    if (field == nullptr) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
    if (!assigned.insert(key).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  key + "'");
    }
    try {
      std::visit(
          [&](auto member) {
            using T = std::remove_cvref_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, int>) {
              std::size_t pos = 0;
              cfg.*member = std::stoi(value, &pos);
              if (pos != value.size()) throw std::invalid_argument("trailing characters");
            } else if constexpr (std::is_same_v<T, double>) {
              std::size_t pos = 0;
              cfg.*member = std::stod(value, &pos);
              if (pos != value.size()) throw std::invalid_argument("trailing characters");
            } else if constexpr (std::is_same_v<T, bool>) {
              if (value == "true") {
                cfg.*member = true;
              } else if (value == "false") {
                cfg.*member = false;
              } else {
                throw std::invalid_argument("expected true/false");
              }
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
              std::size_t pos = 0;
              cfg.*member = std::stoull(value, &pos);
              if (pos != value.size()) throw std::invalid_argument("trailing characters");
            } else {
              cfg.*member = value;
            }
          },
          field->ref);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad value for '" +
                                  key + "': " + e.what());
    }
  }
  return cfg;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("RunConfig::save: cannot open " + path);
  os << to_text();
  if (!os) throw std::runtime_error("RunConfig::save: write failed for " + path);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("RunConfig::load: cannot open " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return from_text(buffer.str());
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_text()); }

void RunConfig::validate() const {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("RunConfig: " + what);
  };
  require(grid_height > 0 && grid_height % 16 == 0, "grid_height must be a positive multiple of 16");
  require(grid_width > 0 && grid_width % 16 == 0, "grid_width must be a positive multiple of 16");
  require(cell_size > 0.0, "cell_size must be positive");
  require(ego_row >= 0 && ego_row < grid_height, "ego_row outside grid");
  require(ego_col >= 0 && ego_col < grid_width, "ego_col outside grid");
  require(z_max > z_min, "z_max must exceed z_min");
  require(density_cap >= 1, "density_cap must be >= 1");
  require(corridor_halfwidth > 0.0, "corridor_halfwidth must be positive");
  require(history_count >= 2, "history_count must be >= 2");
  require(future_count >= 4, "future_count must be >= 4");
  require(route_past >= 1 && route_future >= 1, "route keyframe counts must be >= 1");
  require(keyframe_spacing > 0.0, "keyframe_spacing must be positive");
  require(jitter_sigma >= 0.0, "jitter_sigma must be >= 0");
  require(point_noise_sigma >= 0.0, "point_noise_sigma must be >= 0");
  require(road_halfwidth > 0.0, "road_halfwidth must be positive");
  require(curb_density > 0.0, "curb_density must be positive");
  require(clutter_points >= 0, "clutter_points must be >= 0");
  require(train_count > 0 && test_count > 0, "dataset counts must be positive");
  schedule();  // throws on unknown kind
  require(diffusion_steps >= 1, "diffusion_steps must be >= 1");
  require(normalize_scale > 0.0, "normalize_scale must be positive");
  require(embed_dim > 0 && embed_dim % 2 == 0, "embed_dim must be positive and even");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(base_lr > 0.0, "base_lr must be positive");
  require(lambda_road >= 0.0, "lambda_road must be >= 0");
  require(samples_k >= 1, "samples_k must be >= 1");
  require(hit_threshold > 0.0, "hit_threshold must be positive");
  require(eval_threads >= 1, "eval_threads must be >= 1");
}

GridSpec RunConfig::grid_spec() const {
  return {grid_height, grid_width, cell_size, ego_row, ego_col};
}

LidarRasterParams RunConfig::lidar_params() const { return {z_min, z_max, density_cap}; }

GenParams RunConfig::gen_params() const {
  GenParams p;
  p.keyframe_spacing = keyframe_spacing;
  p.history_count = history_count;
  p.future_count = future_count;
  p.route_past = route_past;
  p.route_future = route_future;
  p.jitter_sigma = jitter_sigma;
  p.point_noise_sigma = point_noise_sigma;
  p.road_halfwidth = road_halfwidth;
  p.curb_density = curb_density;
  p.clutter_points = clutter_points;
  return p;
}

ScheduleKind RunConfig::schedule() const { return schedule_kind_from_string(schedule_kind); }

MetricConventions RunConfig::conventions() const {
  return {fde_mean_over_candidates, hd_min_over_candidates};
}

}  // namespace routediff
