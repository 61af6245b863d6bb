// masklift: lift per-frame 2D instance masks into scene-level 3D masks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "masklift/dataset.hpp"
#include "masklift/error.hpp"
#include "masklift/kdtree.hpp"
#include "masklift/metrics.hpp"
#include "masklift/parallel.hpp"
#include "masklift/pipeline.hpp"
#include "masklift/ply.hpp"
#include "masklift/synth.hpp"

namespace fs = std::filesystem;
using masklift::Error;
using masklift::ErrorCode;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitLoad = 2;
constexpr int kExitValidation = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLoad:
    case ErrorCode::kIo:
    case ErrorCode::kParse:
      return kExitLoad;
    default:
      return kExitValidation;
  }
}

struct Logger {
  bool json = false;

  void operator()(const std::string& stage, const std::string& message) const {
    if (json) {
      std::cout << nlohmann::json{{"stage", stage}, {"message", message}}.dump() << "\n";
    } else {
      std::cout << "[" << stage << "] " << message << "\n";
    }
    std::cout.flush();
  }
};

// Flag values are held as optionals so that only flags the user actually
// passed override the config file.
struct ConfigFlags {
  std::string config_file;
  std::optional<double> voxel, delta, ensemble_delta, match_radius, fz_k, depth_divisor,
      max_depth;
  std::optional<int> stride, frame_stride;
  std::optional<std::size_t> knn, min_segment;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  bool no_ensemble = false;
  bool no_pool_after_merge = false;
  bool strict = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "JSON config file; flags override it");
    app.add_option("--voxel", voxel, "grid pooling voxel size in meters (default 0.05)");
    app.add_option("--delta", delta, "merge overlap threshold (default 0.5)");
    app.add_option("--ensemble-delta", ensemble_delta, "ensemble threshold (default = delta)");
    app.add_option("--match-radius", match_radius, "correspondence radius (default = voxel)");
    app.add_option("--stride", stride, "pixel stride when lifting (default 1)");
    app.add_option("--frame-stride", frame_stride, "use every Nth frame (default 1)");
    app.add_option("--knn", knn, "neighbors for normals and the segment graph (default 16)");
    app.add_option("--fz-k", fz_k, "graph segmentation scale constant (default 0.1)");
    app.add_option("--min-segment", min_segment, "minimum points per segment (default 20)");
    app.add_option("--depth-divisor", depth_divisor, "raw depth units per meter (default 1000)");
    app.add_option("--max-depth", max_depth, "depths beyond this are invalid (default 10)");
    app.add_option("--threads", threads, "worker threads (default MASKLIFT_THREADS or cores)");
    app.add_option("--seed", seed, "seed recorded in the config snapshot");
    app.add_flag("--no-ensemble", no_ensemble, "skip over-segmentation and ensemble");
    app.add_flag("--no-pool-after-merge", no_pool_after_merge, "keep all points after merges");
    app.add_flag("--strict", strict, "treat per-frame load problems as fatal");
  }

  masklift::PipelineConfig resolve() const {
    masklift::PipelineConfig cfg;
    if (!config_file.empty()) cfg.merge_json(masklift::read_text_file(config_file));
    if (voxel) cfg.voxel_size = *voxel;
    if (delta) cfg.delta = *delta;
    if (ensemble_delta) cfg.ensemble_delta = *ensemble_delta;
    if (match_radius) cfg.match_radius = *match_radius;
    if (stride) cfg.stride = *stride;
    if (frame_stride) cfg.frame_stride = *frame_stride;
    if (knn) cfg.knn = *knn;
    if (fz_k) cfg.fz_k = *fz_k;
    if (min_segment) cfg.min_segment = *min_segment;
    if (depth_divisor) cfg.depth_divisor = *depth_divisor;
    if (max_depth) cfg.max_depth = *max_depth;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    if (no_ensemble) cfg.no_ensemble = true;
    if (no_pool_after_merge) cfg.no_pool_after_merge = true;
    if (strict) cfg.strict = true;
    cfg.validate();
    return cfg;
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
}

masklift::LabeledCloud transfer_labels(const masklift::LabeledCloud& source,
                                       const masklift::LabeledCloud& target) {
  masklift::LabeledCloud out;
  out.points = target.points;
  out.labels.resize(target.size(), masklift::kUnlabeled);
  if (source.empty()) return out;
  const masklift::KdTree tree(source.points);
  for (std::size_t i = 0; i < target.size(); ++i) {
    out.labels[i] = source.labels[tree.knn(target.points[i], 1).front().index];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lift per-frame 2D instance masks from posed RGB-D frames into 3D scene masks"};
  app.require_subcommand(1);
  bool json_logs = false;
  app.add_flag("--json-logs", json_logs, "emit machine-readable JSON log lines");

  ConfigFlags flags;

  // run
  auto* run = app.add_subcommand("run", "lift, merge, over-segment, ensemble, export");
  std::string run_scene, run_out, stop_after;
  run->add_option("scene", run_scene, "scene directory")->required();
  run->add_option("-o,--out", run_out, "output directory")->required();
  run->add_option("--stop-after", stop_after, "lift | merge | overseg")
      ->check(CLI::IsMember({"lift", "merge", "overseg"}));
  flags.attach(*run);

  // lift
  auto* lift = app.add_subcommand("lift", "lift and pool every frame; one PLY per frame");
  std::string lift_scene, lift_out;
  lift->add_option("scene", lift_scene, "scene directory")->required();
  lift->add_option("-o,--out", lift_out, "output directory")->required();
  flags.attach(*lift);

  // merge
  auto* merge = app.add_subcommand("merge", "bottom-up merge of lifted frame clouds");
  std::string merge_in, merge_out;
  merge->add_option("lifted", merge_in, "directory of per-frame PLY files")->required();
  merge->add_option("-o,--out", merge_out, "output directory")->required();
  flags.attach(*merge);

  // overseg
  auto* overseg = app.add_subcommand("overseg", "normal-based graph over-segmentation");
  std::string overseg_in, overseg_out;
  overseg->add_option("scene_ply", overseg_in, "merged scene PLY")->required();
  overseg->add_option("-o,--out", overseg_out, "output directory")->required();
  flags.attach(*overseg);

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "unify scene masks with over-segments");
  std::string ens_scene, ens_segments, ens_out;
  ens->add_option("scene_ply", ens_scene, "merged scene PLY")->required();
  ens->add_option("segments", ens_segments, "over-segmentation text file")->required();
  ens->add_option("-o,--out", ens_out, "output directory")->required();
  flags.attach(*ens);

  // eval
  auto* eval = app.add_subcommand("eval", "Hungarian-matched instance IoU");
  std::string eval_pred, eval_gt, eval_report;
  bool eval_transfer = false;
  eval->add_option("pred", eval_pred, "predicted PLY")->required();
  eval->add_option("gt", eval_gt, "ground-truth PLY")->required();
  eval->add_option("-o,--out", eval_report, "write the report JSON here");
  eval->add_flag("--transfer", eval_transfer,
                 "label each predicted point with its nearest ground-truth point instead of "
                 "requiring identical coordinates");

  // synth
  auto* synth = app.add_subcommand("synth", "render a synthetic scene directory");
  std::string synth_spec, synth_out;
  unsigned synth_threads = 0;
  synth->add_option("spec", synth_spec, "scene spec JSON, or 'default'")->required();
  synth->add_option("-o,--out", synth_out, "output scene directory")->required();
  synth->add_option("--threads", synth_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);
  const Logger log{json_logs};

  try {
    if (*run) {
      const auto cfg = flags.resolve();
      std::optional<masklift::Stage> stop;
      if (!stop_after.empty()) stop = masklift::parse_stage(stop_after);
      masklift::run_pipeline(run_scene, cfg, run_out, stop, log);
      log("run", "outputs written to " + run_out);
    } else if (*lift) {
      const auto cfg = flags.resolve();
      const auto scene = masklift::load_scene(lift_scene, cfg.load_options());
      for (const auto& w : scene.warnings) log("load", "warning: " + w);
      const auto clouds = masklift::lift_scene(scene, cfg, log);
      ensure_dir(lift_out);
      masklift::write_lifted(clouds, fs::path(lift_out) / masklift::outputs::kLiftDir);
      masklift::write_text_file(fs::path(lift_out) / masklift::outputs::kConfig, cfg.to_json());
    } else if (*merge) {
      const auto cfg = flags.resolve();
      auto clouds = masklift::read_lifted(merge_in);
      log("merge", std::to_string(clouds.size()) + " clouds");
      const auto result = masklift::merge_clouds(std::move(clouds), cfg);
      ensure_dir(merge_out);
      masklift::write_ply(result.cloud, fs::path(merge_out) / masklift::outputs::kScene);
      masklift::write_text_file(fs::path(merge_out) / masklift::outputs::kTrace,
                                masklift::trace_to_json(result.trace));
      log("merge", std::to_string(result.cloud.label_set().size()) + " masks");
    } else if (*overseg) {
      const auto cfg = flags.resolve();
      const auto scene = masklift::read_ply(overseg_in);
      const auto segs = masklift::oversegment_scene(scene, cfg);
      ensure_dir(overseg_out);
      masklift::write_segments(segs.segment_id, fs::path(overseg_out) / masklift::outputs::kOverseg);
      log("overseg", std::to_string(segs.segment_count()) + " segments");
    } else if (*ens) {
      const auto cfg = flags.resolve();
      const auto scene = masklift::read_ply(ens_scene);
      masklift::Oversegmentation segs{masklift::read_segments(ens_segments)};
      const auto final_cloud = masklift::ensemble_scene(scene, segs, cfg);
      ensure_dir(ens_out);
      masklift::write_ply(final_cloud, fs::path(ens_out) / masklift::outputs::kFinal);
      log("ensemble", std::to_string(final_cloud.label_set().size()) + " final masks");
    } else if (*eval) {
      const auto pred = masklift::read_ply(eval_pred);
      auto gt = masklift::read_ply(eval_gt);
      if (eval_transfer) {
        gt = transfer_labels(gt, pred);
      } else {
        if (pred.size() != gt.size()) {
          throw Error(ErrorCode::kAlignment, "point counts differ: " +
                                                 std::to_string(pred.size()) + " vs " +
                                                 std::to_string(gt.size()));
        }
        for (std::size_t i = 0; i < pred.size(); ++i) {
          if ((pred.points[i] - gt.points[i]).cwiseAbs().maxCoeff() > 1e-6) {
            throw Error(ErrorCode::kAlignment,
                        "coordinates differ at vertex " + std::to_string(i));
          }
        }
      }
      const auto report = masklift::hungarian_match_iou(pred.labels, gt.labels);
      const std::string text = report.to_json();
      if (!eval_report.empty()) masklift::write_text_file(eval_report, text);
      std::cout << text;
    } else if (*synth) {
      const auto spec = synth_spec == "default"
                            ? masklift::default_scene_spec()
                            : masklift::parse_scene_spec(masklift::read_text_file(synth_spec));
      const unsigned threads =
          synth_threads > 0 ? synth_threads : masklift::default_thread_count();
      masklift::write_synthetic_scene(spec, synth_out, threads);
      log("synth", std::to_string(spec.poses.size()) + " frames written to " + synth_out);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << masklift::to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
