#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "routediff/commands.hpp"
#include "routediff/config.hpp"

namespace {

routediff::RunConfig load_config(const std::string& config_path, bool has_seed,
                                 std::uint64_t seed) {
  routediff::RunConfig cfg =
      config_path.empty() ? routediff::RunConfig{} : routediff::RunConfig::load(config_path);
  if (has_seed) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corridor-conditioned diffusion trajectory prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  bool force = false;
  app.add_option("--config", config_path, "Run configuration file (key = value lines)");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--checkpoint", checkpoint_path, "Checkpoint path override");
  app.add_flag("--force", force, "Overwrite existing outputs");

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic train/test datasets");
  auto* train = app.add_subcommand("train", "Train the encoder and denoiser");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  auto* predict = app.add_subcommand("predict", "Sample trajectories for one test item");
  int item_index = 0;
  predict->add_option("--index", item_index, "Test item index");
  auto* ablate = app.add_subcommand("ablate", "Run an ablation sweep");
  std::string axis = "samples";
  ablate->add_option("--axis", axis, "Sweep axis: steps|samples|modalities");
  auto* plot = app.add_subcommand("plot", "Render sweep charts or a scene snapshot");
  std::string sweep_csv;
  std::string scene_csv;
  plot->add_option("--sweep", sweep_csv, "Sweep CSV to chart");
  plot->add_option("--scene", scene_csv, "Predictions CSV to render");

  for (auto* sub : {gen, train, eval, predict, ablate, plot}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const bool has_seed = app.count("--seed") > 0;

  try {
    if (gen->parsed()) {
      const auto cfg = load_config(config_path, has_seed, seed);
      const auto result = routediff::commands::gen_data(cfg, force);
      std::printf("wrote %s, %s, %s\n", result.train_path.c_str(), result.test_path.c_str(),
                  result.manifest_path.c_str());
    } else if (train->parsed()) {
      auto cfg = load_config(config_path, has_seed, seed);
      if (!checkpoint_path.empty()) cfg.checkpoint_path = checkpoint_path;
      const auto result = routediff::commands::train(cfg, out_dir);
      std::printf("final checkpoint: %s\nbest checkpoint: %s\nlog: %s\n",
                  result.final_checkpoint.c_str(), result.best_checkpoint.c_str(),
                  result.log_csv.c_str());
    } else if (eval->parsed()) {
      const auto cfg = load_config(config_path, has_seed, seed);
      const std::string ckpt = checkpoint_path.empty() ? cfg.checkpoint_path : checkpoint_path;
      const auto result = routediff::commands::eval(cfg, ckpt, out_dir);
      std::printf("metrics: %s\ntiming: %s\n", result.metrics_csv.c_str(),
                  result.timing_csv.c_str());
    } else if (predict->parsed()) {
      const auto cfg = load_config(config_path, has_seed, seed);
      const std::string ckpt = checkpoint_path.empty() ? cfg.checkpoint_path : checkpoint_path;
      const auto result = routediff::commands::predict(cfg, ckpt, item_index, out_dir);
      std::printf("predictions: %s\nscene: %s\n", result.predictions_csv.c_str(),
                  result.scene_svg.c_str());
    } else if (ablate->parsed()) {
      auto cfg = load_config(config_path, has_seed, seed);
      if (!checkpoint_path.empty()) cfg.checkpoint_path = checkpoint_path;
      const auto result = routediff::commands::ablate(
          cfg, routediff::commands::ablation_axis_from_string(axis), out_dir);
      std::printf("sweep: %s (%zu rows, %zu failed points)\n", result.sweep_csv.c_str(),
                  result.rows.size(), result.failures.size());
      if (!result.failures.empty() && result.rows.empty()) return 1;
    } else if (plot->parsed()) {
      if (sweep_csv.empty() && scene_csv.empty()) {
        std::cerr << "plot: pass --sweep and/or --scene\n";
        return 1;
      }
      if (!sweep_csv.empty()) {
        const auto result = routediff::commands::plot_sweep(sweep_csv, out_dir);
        for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
      }
      if (!scene_csv.empty()) {
        const auto result = routediff::commands::plot_scene(scene_csv, out_dir);
        for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
