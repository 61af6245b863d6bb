#include "masklift/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "masklift/error.hpp"
#include "masklift/gridpool.hpp"
#include "masklift/lift.hpp"
#include "masklift/parallel.hpp"
#include "masklift/ply.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace masklift {

unsigned default_thread_count() {
  if (const char* env = std::getenv("MASKLIFT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kValidation, "config." + field + ": " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) bad_field("voxel_size", "must be > 0");
  if (!(delta > 0.0 && delta <= 1.0)) bad_field("delta", "must lie in (0, 1]");
  if (ensemble_delta && !(*ensemble_delta > 0.0 && *ensemble_delta <= 1.0)) {
    bad_field("ensemble_delta", "must lie in (0, 1]");
  }
  if (!std::isfinite(match_radius)) bad_field("match_radius", "must be finite");
  if (stride < 1) bad_field("stride", "must be >= 1");
  if (frame_stride < 1) bad_field("frame_stride", "must be >= 1");
  if (knn < 1) bad_field("knn", "must be >= 1");
  if (!(fz_k > 0.0) || !std::isfinite(fz_k)) bad_field("fz_k", "must be > 0");
  if (min_segment < 1) bad_field("min_segment", "must be >= 1");
  if (!(depth_divisor > 0.0)) bad_field("depth_divisor", "must be > 0");
  if (!(max_depth > 0.0)) bad_field("max_depth", "must be > 0");
}

MergeConfig PipelineConfig::merge_config() const {
  MergeConfig m;
  m.delta = delta;
  m.match_radius = match_radius;
  m.pool_after_merge = !no_pool_after_merge;
  m.pool = pool_config();
  return m;
}

MergeConfig PipelineConfig::ensemble_config() const {
  MergeConfig m = merge_config();
  m.delta = ensemble_delta.value_or(delta);
  return m;
}

OversegConfig PipelineConfig::overseg_config() const {
  return OversegConfig{knn, fz_k, min_segment};
}

unsigned PipelineConfig::effective_threads() const {
  return threads > 0 ? threads : default_thread_count();
}

std::string PipelineConfig::to_json() const {
  json doc;
  doc["voxel_size"] = voxel_size;
  doc["delta"] = delta;
  doc["ensemble_delta"] = ensemble_delta.value_or(delta);
  doc["match_radius"] = match_radius > 0.0 ? match_radius : voxel_size;
  doc["stride"] = stride;
  doc["frame_stride"] = frame_stride;
  doc["knn"] = knn;
  doc["fz_k"] = fz_k;
  doc["min_segment"] = min_segment;
  doc["depth_divisor"] = depth_divisor;
  doc["max_depth"] = max_depth;
  doc["no_ensemble"] = no_ensemble;
  doc["no_pool_after_merge"] = no_pool_after_merge;
  doc["strict"] = strict;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

void PipelineConfig::merge_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kValidation, "config: expected an object");

  auto number = [&](const char* key, auto& field) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) bad_field(key, "expected a number");
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_integral_v<T>) {
      if (!doc[key].is_number_integer()) bad_field(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (doc[key].get<long long>() < 0) bad_field(key, "must be non-negative");
      }
    }
    field = doc[key].get<T>();
  };
  auto flag = [&](const char* key, bool& field) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_boolean()) bad_field(key, "expected a boolean");
    field = doc[key].get<bool>();
  };

  for (const auto& [key, value] : doc.items()) {
    static const char* known[] = {"voxel_size", "delta", "ensemble_delta", "match_radius",
                                  "stride", "frame_stride", "knn", "fz_k", "min_segment",
                                  "depth_divisor", "max_depth", "no_ensemble",
                                  "no_pool_after_merge", "strict", "threads", "seed"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      bad_field(key, "unknown field");
    }
  }

  number("voxel_size", voxel_size);
  number("delta", delta);
  if (doc.contains("ensemble_delta")) {
    double d = 0.0;
    number("ensemble_delta", d);
    ensemble_delta = d;
  }
  number("match_radius", match_radius);
  number("stride", stride);
  number("frame_stride", frame_stride);
  number("knn", knn);
  number("fz_k", fz_k);
  number("min_segment", min_segment);
  number("depth_divisor", depth_divisor);
  number("max_depth", max_depth);
  flag("no_ensemble", no_ensemble);
  flag("no_pool_after_merge", no_pool_after_merge);
  flag("strict", strict);
  number("threads", threads);
  number("seed", seed);
}

std::optional<Stage> parse_stage(const std::string& name) {
  if (name == "lift") return Stage::kLift;
  if (name == "merge") return Stage::kMerge;
  if (name == "overseg") return Stage::kOverseg;
  if (name == "ensemble") return Stage::kEnsemble;
  return std::nullopt;
}

std::vector<LabeledCloud> lift_scene(const SceneDataset& scene, const PipelineConfig& cfg,
                                     const ProgressFn& progress) {
  const std::size_t n = scene.frames.size();
  std::vector<LabeledCloud> clouds(n);
  std::vector<std::uint32_t> mask_count(n, 0);
  const auto sampling = cfg.sampling();
  const auto pool = cfg.pool_config();

  // Lift with frame-local ranks 1..count, then shift into global blocks in
  // frame order. Rank order is preserved, so pooling ties resolve the same.
  parallel_for(n, cfg.effective_threads(), [&](std::size_t i) {
    const auto& rec = scene.frames[i];
    try {
      const auto frame = load_frame(scene, rec);
      mask_count[i] = static_cast<std::uint32_t>(frame.mask.confidences.size());
      auto lifted = lift_frame(frame.mask, frame.depth, scene.intrinsics, rec.pose,
                               IdBlock{1, mask_count[i]}, sampling);
      clouds[i] = grid_pool(lifted, pool);
      round_to_float(clouds[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "frame '" + rec.basename + "': " + e.what());
    }
  });

  IdAllocator alloc;
  for (std::size_t i = 0; i < n; ++i) {
    const IdBlock block = alloc.reserve(mask_count[i]);
    for (Label& l : clouds[i].labels) {
      if (l != kUnlabeled) l += block.first - 1;
    }
    if (progress) {
      progress("lift", "frame " + scene.frames[i].basename + ": " +
                           std::to_string(clouds[i].size()) + " points, " +
                           std::to_string(mask_count[i]) + " masks");
    }
  }
  return clouds;
}

BottomUpResult merge_clouds(std::vector<LabeledCloud> clouds, const PipelineConfig& cfg) {
  auto result = bottom_up_merge(std::move(clouds), cfg.merge_config(), cfg.effective_threads());
  round_to_float(result.cloud);
  return result;
}

Oversegmentation oversegment_scene(const LabeledCloud& scene, const PipelineConfig& cfg) {
  return oversegment(scene.points, cfg.overseg_config(), cfg.effective_threads());
}

LabeledCloud ensemble_scene(const LabeledCloud& scene, const Oversegmentation& overseg,
                            const PipelineConfig& cfg) {
  return ensemble(scene, overseg, cfg.ensemble_config());
}

std::string trace_to_json(const MergeTreeTrace& trace) {
  json levels = json::array();
  for (std::size_t t = 0; t < trace.levels.size(); ++t) {
    json merges = json::array();
    for (const auto& m : trace.levels[t].merges) {
      merges.push_back({{"left", m.left}, {"right", m.right}, {"merged_pairs", m.merged_pairs}});
    }
    json level = {{"level", t}, {"merges", merges}};
    level["carried"] = trace.levels[t].carried ? json(*trace.levels[t].carried) : json(nullptr);
    levels.push_back(level);
  }
  return levels.dump(2) + "\n";
}

void write_lifted(const std::vector<LabeledCloud>& clouds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ply", i);
    write_ply(clouds[i], dir / name);
  }
}

std::vector<LabeledCloud> read_lifted(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kLoad, "lifted cloud directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ply") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kLoad, "no .ply files in " + dir.string());
  std::vector<LabeledCloud> clouds;
  clouds.reserve(files.size());
  for (const auto& f : files) clouds.push_back(read_ply(f));
  return clouds;
}

OutputBundle run_pipeline(const fs::path& scene_root, const PipelineConfig& cfg,
                          const fs::path& out_dir, std::optional<Stage> stop_after,
                          const ProgressFn& progress) {
  cfg.validate();
  auto say = [&](const std::string& stage, const std::string& msg) {
    if (progress) progress(stage, msg);
  };

  const SceneDataset scene = load_scene(scene_root, cfg.load_options());
  for (const auto& w : scene.warnings) say("load", "warning: " + w);
  say("load", std::to_string(scene.frames.size()) + " frames");

  auto lifted = lift_scene(scene, cfg, progress);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir.string());

  OutputBundle bundle;
  bundle.config_snapshot = cfg.to_json();
  write_text_file(out_dir / outputs::kConfig, bundle.config_snapshot);

  if (stop_after == Stage::kLift) {
    write_lifted(lifted, out_dir / outputs::kLiftDir);
    bundle.lifted = std::move(lifted);
    bundle.stopped_after = Stage::kLift;
    return bundle;
  }

  auto merged = merge_clouds(std::move(lifted), cfg);
  bundle.scene = std::move(merged.cloud);
  bundle.trace = std::move(merged.trace);
  say("merge", std::to_string(bundle.trace.merge_count()) + " merges over " +
                   std::to_string(bundle.trace.levels.size()) + " levels, " +
                   std::to_string(bundle.scene.size()) + " points, " +
                   std::to_string(bundle.scene.label_set().size()) + " masks");
  write_ply(bundle.scene, out_dir / outputs::kScene);
  write_text_file(out_dir / outputs::kTrace, trace_to_json(bundle.trace));
  if (stop_after == Stage::kMerge) {
    bundle.final_cloud = bundle.scene;
    bundle.stopped_after = Stage::kMerge;
    return bundle;
  }

  if (cfg.no_ensemble && stop_after != Stage::kOverseg) {
    bundle.final_cloud = bundle.scene;
    write_ply(bundle.final_cloud, out_dir / outputs::kFinal);
    return bundle;
  }

  bundle.overseg = oversegment_scene(bundle.scene, cfg);
  say("overseg", std::to_string(bundle.overseg->segment_count()) + " segments");
  write_segments(bundle.overseg->segment_id, out_dir / outputs::kOverseg);
  if (stop_after == Stage::kOverseg) {
    bundle.final_cloud = bundle.scene;
    bundle.stopped_after = Stage::kOverseg;
    return bundle;
  }

  bundle.final_cloud = ensemble_scene(bundle.scene, *bundle.overseg, cfg);
  say("ensemble", std::to_string(bundle.final_cloud.label_set().size()) + " final masks");
  write_ply(bundle.final_cloud, out_dir / outputs::kFinal);
  return bundle;
}

}  // namespace masklift
