#include "routediff/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "routediff/model.hpp"
#include "routediff/optim.hpp"
#include "routediff/svg.hpp"

namespace fs = std::filesystem;

namespace routediff::commands {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string hex_hash(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void check_dataset_matches_config(const Dataset& ds, const RunConfig& cfg, const char* what) {
  if (ds.samples.empty()) throw std::runtime_error(std::string(what) + ": dataset is empty");
  const ScenarioSample& s = ds.samples.front();
  if (static_cast<int>(s.history.points.size()) != cfg.history_count ||
      static_cast<int>(s.future.points.size()) != cfg.future_count ||
      static_cast<int>(s.route.points.size()) != cfg.route_past + cfg.route_future) {
    throw std::runtime_error(std::string(what) +
                             ": dataset keyframe layout does not match the config "
                             "(history/future/route counts)");
  }
}

// Per-item conditioning + sampling used by eval, predict, and ablate.
std::vector<std::vector<Vec2>> sample_for_item(const Model& model, const RunConfig& cfg,
                                               const NoiseSchedule& sched,
                                               const ScenarioSample& item, int k,
                                               std::uint64_t item_id) {
  const Tensor input = build_input_tensor(item, cfg);
  const auto enc = model.encoder.encode(input);
  return sample_trajectories(enc.condition, k, model.denoiser, sched, cfg.normalize_scale,
                             cfg.seed, item_id);
}

}  // namespace

GenDataResult gen_data(const RunConfig& cfg, bool force) {
  cfg.validate();
  GenDataResult result;
  result.train_path = cfg.train_dataset;
  result.test_path = cfg.test_dataset;
  result.manifest_path = (fs::path(cfg.train_dataset).parent_path() / "manifest.txt").string();

  for (const std::string& path : {result.train_path, result.test_path}) {
    if (!force && fs::exists(path)) {
      throw std::runtime_error("gen-data: " + path + " already exists (use --force to overwrite)");
    }
  }
  ensure_parent_dir(result.train_path);
  ensure_parent_dir(result.test_path);
  ensure_parent_dir(result.manifest_path);

  const auto uniform_counts = [](int total) {
    std::map<ScenarioKind, int> counts;
    const int base = total / static_cast<int>(kAllScenarioKinds.size());
    int remainder = total % static_cast<int>(kAllScenarioKinds.size());
    for (ScenarioKind kind : kAllScenarioKinds) {
      counts[kind] = base + (remainder > 0 ? 1 : 0);
      if (remainder > 0) --remainder;
    }
    return counts;
  };

  const std::string snapshot = cfg.to_text();
  const Dataset train_ds =
      make_dataset(uniform_counts(cfg.train_count), cfg.gen_params(), cfg.seed, "train", snapshot);
  const Dataset test_ds =
      make_dataset(uniform_counts(cfg.test_count), cfg.gen_params(), cfg.seed, "test", snapshot);
  save_dataset(train_ds, result.train_path);
  save_dataset(test_ds, result.test_path);

  std::ofstream manifest(result.manifest_path, std::ios::trunc);
  if (!manifest) throw std::runtime_error("gen-data: cannot write " + result.manifest_path);
  manifest << "config_hash = " << hex_hash(cfg.hash()) << "\n";
  manifest << "seed = " << cfg.seed << "\n";
  manifest << "train_file = " << result.train_path << "\n";
  manifest << "train_samples = " << train_ds.samples.size() << "\n";
  manifest << "test_file = " << result.test_path << "\n";
  manifest << "test_samples = " << test_ds.samples.size() << "\n";
  return result;
}

TrainResult train(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const Dataset ds = load_dataset(cfg.train_dataset);
  check_dataset_matches_config(ds, cfg, "train");

  Model model(cfg);
  Rng init_rng = Rng::derive(cfg.seed, 0x1417);
  model.init_params(init_rng);
  std::vector<Tensor> params;
  for (const NamedParam& p : model.named_params()) params.push_back(p.tensor);
  AdamOptimizer optimizer(params);
  const NoiseSchedule sched = build_schedule(cfg.diffusion_steps, cfg.schedule());

  TrainResult result;
  result.final_checkpoint = cfg.checkpoint_path;
  result.best_checkpoint = cfg.checkpoint_path + ".best";
  result.log_csv = (fs::path(out_dir) / "training_log.csv").string();
  ensure_parent_dir(result.final_checkpoint);

  std::ofstream log(result.log_csv, std::ios::trunc);
  if (!log) throw std::runtime_error("train: cannot write " + result.log_csv);
  log << "epoch,diffusion_loss,road_loss,learning_rate\n";

  Rng train_rng = Rng::derive(cfg.seed, 0x7EA1);
  const std::size_t n = ds.samples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double best_total = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.base_lr);
    // Fisher-Yates shuffle from the training stream.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(train_rng.uniform_int(0, static_cast<int>(i)));
      std::swap(order[i], order[j]);
    }

    double diffusion_sum = 0.0;
    double road_sum = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double nb = static_cast<double>(end - start);

      optimizer.zero_grad();
      std::vector<DiffusionExample> examples;
      Tensor road_acc;
      for (std::size_t bi = start; bi < end; ++bi) {
        const ScenarioSample& sample = ds.samples[order[bi]];
        const Tensor input = build_input_tensor(sample, cfg);
        const auto enc = model.encoder.encode(input);
        const Tensor road = road_seg_loss(enc.seg_logits, build_gt_mask(sample, cfg));
        road_acc = road_acc.valid() ? add(road_acc, road) : road;
        examples.push_back(
            {normalize_trajectory(sample.future.points, cfg.normalize_scale), enc.condition});
      }
      const Tensor diffusion = diffusion_loss(examples, train_rng, sched, model.denoiser);
      const Tensor road_mean = scale(road_acc, 1.0 / nb);
      const Tensor total = total_loss(diffusion, road_mean, cfg.lambda_road);
      if (!std::isfinite(total.item())) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 "; last good checkpoint preserved");
      }
      backward(total);
      if (!optimizer.step(lr)) {
        throw std::runtime_error("train: non-finite gradient at epoch " + std::to_string(epoch) +
                                 "; step rejected, last good checkpoint preserved");
      }
      diffusion_sum += diffusion.item() * nb;
      road_sum += road_mean.item() * nb;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.diffusion_loss = diffusion_sum / static_cast<double>(n);
    entry.road_loss = road_sum / static_cast<double>(n);
    entry.learning_rate = lr;
    result.epochs.push_back(entry);
    log << epoch << "," << fmt_num(entry.diffusion_loss) << "," << fmt_num(entry.road_loss) << ","
        << fmt_num(entry.learning_rate) << "\n";
    log.flush();

    const double total_mean = entry.diffusion_loss + cfg.lambda_road * entry.road_loss;
    if (total_mean < best_total) {
      best_total = total_mean;
      model.save(result.best_checkpoint);
    }
    model.save(result.final_checkpoint);
  }
  return result;
}

EvalResult eval(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir, bool quiet) {
  cfg.validate();
  fs::create_directories(out_dir);
  const Dataset ds = load_dataset(cfg.test_dataset);
  check_dataset_matches_config(ds, cfg, "eval");

  Model model(cfg);
  model.load(checkpoint_path);
  const NoiseSchedule sched = build_schedule(cfg.diffusion_steps, cfg.schedule());

  const std::size_t n = ds.samples.size();
  std::vector<PredictionSet> sets(n);
  std::vector<double> times(n, 0.0);

  const int workers = std::max(1, std::min<int>(cfg.eval_threads, static_cast<int>(n)));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  const auto worker = [&]() {
    try {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        const auto t0 = std::chrono::steady_clock::now();
        sets[i].candidates = sample_for_item(model, cfg, sched, ds.samples[i], cfg.samples_k, i);
        const auto t1 = std::chrono::steady_clock::now();
        sets[i].ground_truth = ds.samples[i].future.points;
        times[i] = std::chrono::duration<double>(t1 - t0).count();
      }
    } catch (const std::exception& e) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (first_error.empty()) first_error = e.what();
      next.store(n);  // stop the other workers
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error("eval: " + first_error);

  EvalResult result;
  result.report = evaluate(sets, cfg.hit_threshold, cfg.conventions(), times);
  result.kinds.reserve(n);
  for (const ScenarioSample& s : ds.samples) result.kinds.push_back(s.kind);

  result.metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
  std::ofstream mcsv(result.metrics_csv, std::ios::trunc);
  if (!mcsv) throw std::runtime_error("eval: cannot write " + result.metrics_csv);
  mcsv << "index,kind,fde,min_ade,hit,hd\n";
  for (std::size_t i = 0; i < n; ++i) {
    const SampleScore& s = result.report.per_sample[i];
    mcsv << i << "," << to_string(result.kinds[i]) << "," << fmt_num(s.fde) << ","
         << fmt_num(s.min_ade) << "," << (s.hit ? 1 : 0) << "," << fmt_num(s.hd) << "\n";
  }
  mcsv << "mean,," << fmt_num(result.report.mean_fde) << "," << fmt_num(result.report.mean_min_ade)
       << "," << fmt_num(result.report.hit_rate) << "," << fmt_num(result.report.mean_hd) << "\n";

  // Wall-clock timings live in a sidecar so the metrics report stays
  // checksum-stable across reruns.
  result.timing_csv = (fs::path(out_dir) / "timing.csv").string();
  std::ofstream tcsv(result.timing_csv, std::ios::trunc);
  if (!tcsv) throw std::runtime_error("eval: cannot write " + result.timing_csv);
  tcsv << "index,infer_time_s\n";
  for (std::size_t i = 0; i < n; ++i) tcsv << i << "," << fmt_num(times[i]) << "\n";
  tcsv << "mean," << fmt_num(result.report.mean_infer_time_s) << "\n";

  if (!quiet) {
    std::printf("samples=%zu k=%d d=%g\n", n, result.report.k, result.report.d);
    std::printf("%-10s %-10s %-10s %-10s %-12s\n", "FDE", "minADE", "HitRate", "HD", "InferTime(s)");
    std::printf("%-10.4f %-10.4f %-10.4f %-10.4f %-12.5f\n", result.report.mean_fde,
                result.report.mean_min_ade, result.report.hit_rate, result.report.mean_hd,
                result.report.mean_infer_time_s);
  }
  return result;
}

PredictResult predict(const RunConfig& cfg, const std::string& checkpoint_path, int item_index,
                      const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const Dataset ds = load_dataset(cfg.test_dataset);
  check_dataset_matches_config(ds, cfg, "predict");
  if (item_index < 0 || item_index >= static_cast<int>(ds.samples.size())) {
    throw std::invalid_argument("predict: item index " + std::to_string(item_index) +
                                " outside dataset of " + std::to_string(ds.samples.size()));
  }

  Model model(cfg);
  model.load(checkpoint_path);
  const NoiseSchedule sched = build_schedule(cfg.diffusion_steps, cfg.schedule());
  const ScenarioSample& item = ds.samples[static_cast<std::size_t>(item_index)];
  const auto predictions = sample_for_item(model, cfg, sched, item, cfg.samples_k,
                                           static_cast<std::uint64_t>(item_index));

  PredictResult result;
  result.k = cfg.samples_k;
  result.predictions_csv = (fs::path(out_dir) / "predictions.csv").string();
  std::ofstream csv(result.predictions_csv, std::ios::trunc);
  if (!csv) throw std::runtime_error("predict: cannot write " + result.predictions_csv);
  csv << "# corridor_halfwidth = " << fmt_num(cfg.corridor_halfwidth) << "\n";
  csv << "series,point,x,y\n";
  const auto dump = [&](const std::string& series, const std::vector<Vec2>& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      csv << series << "," << i << "," << fmt_num(pts[i].x) << "," << fmt_num(pts[i].y) << "\n";
    }
  };
  dump("route", item.route.points);
  dump("history", item.history.points);
  dump("ground_truth", item.future.points);
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    dump("prediction_" + std::to_string(k), predictions[k]);
  }
  csv.close();

  ScenePlot scene;
  scene.route = item.route;
  scene.corridor_halfwidth = cfg.corridor_halfwidth;
  scene.history = item.history;
  scene.ground_truth = item.future;
  scene.predictions = predictions;
  result.scene_svg = (fs::path(out_dir) / "scene.svg").string();
  write_scene_svg(result.scene_svg, scene);
  return result;
}

AblationAxis ablation_axis_from_string(const std::string& name) {
  if (name == "steps") return AblationAxis::kSteps;
  if (name == "samples") return AblationAxis::kSamples;
  if (name == "modalities") return AblationAxis::kModalities;
  throw std::invalid_argument("unknown ablation axis '" + name + "' (steps|samples|modalities)");
}

namespace {

SweepRow row_from_report(const std::string& value, const MetricsReport& report) {
  return {value, report.mean_fde, report.mean_min_ade, report.hit_rate, report.mean_hd};
}

std::vector<SweepRow> sweep_samples_axis(const RunConfig& cfg, const std::string& out_dir,
                                         std::vector<std::string>& failures) {
  const std::vector<int> ks = {1, 2, 4, 8};
  std::vector<SweepRow> rows;
  Model model(cfg);
  try {
    model.load(cfg.checkpoint_path);
  } catch (const std::exception& e) {
    for (int k : ks) {
      failures.push_back("samples k=" + std::to_string(k) + ": " + e.what());
    }
    return rows;
  }
  const Dataset ds = load_dataset(cfg.test_dataset);
  check_dataset_matches_config(ds, cfg, "ablate");
  const NoiseSchedule sched = build_schedule(cfg.diffusion_steps, cfg.schedule());
  const int k_max = ks.back();

  std::vector<PredictionSet> full(ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    full[i].candidates = sample_for_item(model, cfg, sched, ds.samples[i], k_max, i);
    full[i].ground_truth = ds.samples[i].future.points;
  }
  for (int k : ks) {
    std::vector<PredictionSet> prefix(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
      prefix[i].candidates.assign(full[i].candidates.begin(), full[i].candidates.begin() + k);
      prefix[i].ground_truth = full[i].ground_truth;
    }
    rows.push_back(
        row_from_report(std::to_string(k), evaluate(prefix, cfg.hit_threshold, cfg.conventions())));
  }
  (void)out_dir;
  return rows;
}

SweepRow sweep_retrain_point(const RunConfig& point_cfg, const std::string& label,
                             const std::string& point_dir) {
  fs::create_directories(point_dir);
  RunConfig cfg = point_cfg;
  cfg.checkpoint_path =
      (fs::path(point_dir) / ("model_" + hex_hash(cfg.hash()) + ".ckpt")).string();
  if (!fs::exists(cfg.checkpoint_path)) {
    train(cfg, point_dir);
  }
  const EvalResult ev = eval(cfg, cfg.checkpoint_path, point_dir, /*quiet=*/true);
  return row_from_report(label, ev.report);
}

}  // namespace

AblateResult ablate(const RunConfig& cfg, AblationAxis axis, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  AblateResult result;

  if (axis == AblationAxis::kSamples) {
    result.rows = sweep_samples_axis(cfg, out_dir, result.failures);
  } else if (axis == AblationAxis::kSteps) {
    for (int steps : {5, 10, 20}) {
      RunConfig point = cfg;
      point.diffusion_steps = steps;
      const std::string dir = (fs::path(out_dir) / ("steps_" + std::to_string(steps))).string();
      try {
        result.rows.push_back(sweep_retrain_point(point, std::to_string(steps), dir));
      } catch (const std::exception& e) {
        result.failures.push_back("steps T=" + std::to_string(steps) + ": " + e.what());
      }
    }
  } else {
    struct ModalityPoint {
      const char* label;
      bool mask_history;
      bool mask_route;
    };
    const ModalityPoint points[] = {
        {"L.", true, true}, {"L.+M.", true, false}, {"L.+M.+H.", false, false}};
    for (const ModalityPoint& mp : points) {
      RunConfig point = cfg;
      point.mask_history = mp.mask_history;
      point.mask_route = mp.mask_route;
      const std::string dir =
          (fs::path(out_dir) / (std::string("modality_") + hex_hash(fnv1a64(mp.label)))).string();
      try {
        result.rows.push_back(sweep_retrain_point(point, mp.label, dir));
      } catch (const std::exception& e) {
        result.failures.push_back(std::string("modalities ") + mp.label + ": " + e.what());
      }
    }
  }

  for (const std::string& f : result.failures) {
    std::cerr << "ablate: point failed: " << f << "\n";
  }

  const char* axis_name = axis == AblationAxis::kSteps    ? "steps"
                          : axis == AblationAxis::kSamples ? "samples"
                                                           : "modalities";
  result.sweep_csv = (fs::path(out_dir) / ("sweep_" + std::string(axis_name) + ".csv")).string();
  std::ofstream csv(result.sweep_csv, std::ios::trunc);
  if (!csv) throw std::runtime_error("ablate: cannot write " + result.sweep_csv);
  csv << "axis,value,fde,min_ade,hit_rate,hd\n";
  for (const SweepRow& row : result.rows) {
    csv << axis_name << "," << row.value << "," << fmt_num(row.fde) << "," << fmt_num(row.min_ade)
        << "," << fmt_num(row.hit_rate) << "," << fmt_num(row.hd) << "\n";
  }
  return result;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

PlotResult plot_sweep(const std::string& sweep_csv, const std::string& out_dir) {
  std::ifstream is(sweep_csv);
  if (!is) throw std::runtime_error("plot: cannot open " + sweep_csv);
  fs::create_directories(out_dir);

  std::string line;
  int line_no = 0;
  if (!std::getline(is, line)) {
    throw std::runtime_error(sweep_csv + " line 1: missing header");
  }
  ++line_no;
  if (split_csv_line(line) != std::vector<std::string>{"axis", "value", "fde", "min_ade",
                                                       "hit_rate", "hd"}) {
    throw std::runtime_error(sweep_csv + " line 1: unexpected header '" + line + "'");
  }

  std::string axis_name = "value";
  std::vector<std::string> values;
  std::vector<double> fde_col, ade_col, hit_col, hd_col;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 6) {
      throw std::runtime_error(sweep_csv + " line " + std::to_string(line_no) +
                               ": expected 6 columns, got " + std::to_string(cells.size()));
    }
    axis_name = cells[0];
    values.push_back(cells[1]);
    try {
      std::size_t pos = 0;
      fde_col.push_back(std::stod(cells[2], &pos));
      ade_col.push_back(std::stod(cells[3], &pos));
      hit_col.push_back(std::stod(cells[4], &pos));
      hd_col.push_back(std::stod(cells[5], &pos));
    } catch (const std::exception&) {
      throw std::runtime_error(sweep_csv + " line " + std::to_string(line_no) +
                               ": non-numeric metric value");
    }
  }
  if (values.empty()) {
    throw std::runtime_error(sweep_csv + ": no data rows");
  }

  // Numeric sweep values plot on a numeric axis; otherwise evenly spaced
  // category positions with the raw labels.
  std::vector<double> xs(values.size());
  std::vector<std::string> tick_labels;
  bool numeric = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      std::size_t pos = 0;
      xs[i] = std::stod(values[i], &pos);
      if (pos != values[i].size()) numeric = false;
    } catch (const std::exception&) {
      numeric = false;
    }
    if (!numeric) break;
  }
  if (!numeric) {
    for (std::size_t i = 0; i < values.size(); ++i) xs[i] = static_cast<double>(i);
    tick_labels = values;
  }

  PlotResult result;
  const struct {
    const char* file;
    const char* title;
    const std::vector<double>* col;
  } charts[] = {
      {"sweep_fde.svg", "FDE (m)", &fde_col},
      {"sweep_min_ade.svg", "minADE (m)", &ade_col},
      {"sweep_hit_rate.svg", "HitRate", &hit_col},
      {"sweep_hd.svg", "HD (m)", &hd_col},
  };
  for (const auto& chart : charts) {
    const std::string path = (fs::path(out_dir) / chart.file).string();
    write_line_chart(path, chart.title, axis_name, chart.title, xs, *chart.col, tick_labels);
    result.files.push_back(path);
  }
  return result;
}

PlotResult plot_scene(const std::string& predictions_csv, const std::string& out_dir) {
  std::ifstream is(predictions_csv);
  if (!is) throw std::runtime_error("plot: cannot open " + predictions_csv);
  fs::create_directories(out_dir);

  ScenePlot scene;
  std::map<std::string, std::vector<Vec2>> series;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.find("corridor_halfwidth") != std::string::npos && eq != std::string::npos) {
        scene.corridor_halfwidth = std::stod(line.substr(eq + 1));
      }
      continue;
    }
    const std::vector<std::string> cells = split_csv_line(line);
    if (!header_seen) {
      if (cells != std::vector<std::string>{"series", "point", "x", "y"}) {
        throw std::runtime_error(predictions_csv + " line " + std::to_string(line_no) +
                                 ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 4) {
      throw std::runtime_error(predictions_csv + " line " + std::to_string(line_no) +
                               ": expected 4 columns, got " + std::to_string(cells.size()));
    }
    try {
      series[cells[0]].push_back({std::stod(cells[2]), std::stod(cells[3])});
    } catch (const std::exception&) {
      throw std::runtime_error(predictions_csv + " line " + std::to_string(line_no) +
                               ": non-numeric coordinate");
    }
  }
  if (!series.count("route") || !series.count("ground_truth")) {
    throw std::runtime_error(predictions_csv + ": missing route or ground_truth series");
  }
  scene.route.points = series["route"];
  scene.ground_truth.points = series["ground_truth"];
  if (series.count("history")) scene.history.points = series["history"];
  for (int k = 0;; ++k) {
    const std::string key = "prediction_" + std::to_string(k);
    if (!series.count(key)) break;
    scene.predictions.push_back(series[key]);
  }

  PlotResult result;
  const std::string path = (fs::path(out_dir) / "scene.svg").string();
  write_scene_svg(path, scene);
  result.files.push_back(path);
  return result;
}

}  // namespace routediff::commands
