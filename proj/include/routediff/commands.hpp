#pragma once

#include <string>
#include <vector>

#include "routediff/config.hpp"
#include "routediff/metrics.hpp"
#include "routediff/scenario.hpp"

namespace routediff::commands {

struct GenDataResult {
  std::string train_path;
  std::string test_path;
  std::string manifest_path;
};

// Writes the train/test dataset containers plus a manifest recording the
// config hash and seed. Refuses to overwrite existing files unless `force`.
GenDataResult gen_data(const RunConfig& cfg, bool force);

struct EpochLog {
  int epoch = 0;
  double diffusion_loss = 0.0;
  double road_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  std::string final_checkpoint;
  std::string best_checkpoint;
  std::string log_csv;
  std::vector<EpochLog> epochs;
};

// Minimizes the combined loss with Adam under the cosine schedule. Writes a
// per-epoch CSV log, the best checkpoint (lowest combined loss), and the
// final checkpoint at cfg.checkpoint_path. Aborts on a non-finite loss with
// the last good checkpoint left on disk.
TrainResult train(const RunConfig& cfg, const std::string& out_dir);

struct EvalResult {
  MetricsReport report;
  std::vector<ScenarioKind> kinds;  // per test item, aligned with report rows
  std::string metrics_csv;
  std::string timing_csv;
};

// Samples cfg.samples_k trajectories per test item (segmentation supervision
// never runs) and writes the metrics CSV plus a timing sidecar. The metrics
// CSV is deterministic for a fixed config and seed; wall-clock timings are
// kept out of it by design.
EvalResult eval(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir, bool quiet = false);

struct PredictResult {
  std::string predictions_csv;
  std::string scene_svg;
  int k = 0;
};

// Samples one test item and writes the route/history/ground-truth/prediction
// polylines as CSV plus a rendered scene snapshot.
PredictResult predict(const RunConfig& cfg, const std::string& checkpoint_path, int item_index,
                      const std::string& out_dir);

enum class AblationAxis { kSteps, kSamples, kModalities };
AblationAxis ablation_axis_from_string(const std::string& name);

struct SweepRow {
  std::string value;
  double fde = 0.0;
  double min_ade = 0.0;
  double hit_rate = 0.0;
  double hd = 0.0;
};

struct AblateResult {
  std::string sweep_csv;
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // per-point failure notes; sweep continues
};

// steps axis: retrains at T in {5, 10, 20}; modalities axis: retrains with
// channel masks {L., L.+M., L.+M.+H.}; samples axis: reuses the checkpoint at
// cfg.checkpoint_path and evaluates nested prefixes k in {1, 2, 4, 8} of one
// K=8 sample set. Sweep checkpoints are keyed by config hash.
AblateResult ablate(const RunConfig& cfg, AblationAxis axis, const std::string& out_dir);

struct PlotResult {
  std::vector<std::string> files;
};

// One chart per metric column of a sweep CSV.
PlotResult plot_sweep(const std::string& sweep_csv, const std::string& out_dir);
// Scene snapshot from a predictions CSV written by `predict`.
PlotResult plot_scene(const std::string& predictions_csv, const std::string& out_dir);

}  // namespace routediff::commands
