#include "routediff/model.hpp"

namespace routediff {

Model::Model(const RunConfig& cfg)
    : encoder(cfg.grid_height, cfg.grid_width),
      denoiser(cfg.future_count, cfg.embed_dim,
               (cfg.grid_height / 16) * (cfg.grid_width / 16)) {}

void Model::init_params(Rng& rng) {
  encoder.init_params(rng);
  denoiser.init_params(rng);
}

std::vector<NamedParam> Model::named_params() const {
  std::vector<NamedParam> params = encoder.named_params("encoder");
  std::vector<NamedParam> dn = denoiser.named_params("denoiser");
  params.insert(params.end(), dn.begin(), dn.end());
  return params;
}

void Model::save(const std::string& path) const { save_checkpoint(path, named_params()); }

void Model::load(const std::string& path) {
  std::vector<NamedParam> params = named_params();
  load_checkpoint(path, params);
}

Tensor build_input_tensor(const ScenarioSample& sample, const RunConfig& cfg) {
  const GridSpec spec = cfg.grid_spec();
  const LidarRaster lidar = rasterize_lidar(sample.cloud, spec, cfg.lidar_params());
  BevGrid history = rasterize_history(sample.history, spec);
  BevGrid route = rasterize_route(sample.route, spec, cfg.corridor_halfwidth);
  if (cfg.mask_history) std::fill(history.data.begin(), history.data.end(), 0.0);
  if (cfg.mask_route) std::fill(route.data.begin(), route.data.end(), 0.0);
  BevGrid input = assemble_input(lidar.grid, history, route);
  return Tensor::from_data({5, spec.height_cells, spec.width_cells}, std::move(input.data));
}

Tensor build_gt_mask(const ScenarioSample& sample, const RunConfig& cfg) {
  return rasterize_gt_road_mask(sample.future, cfg.grid_spec(), cfg.corridor_halfwidth,
                                cfg.grid_height / 4, cfg.grid_width / 4);
}

}  // namespace routediff
