#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "masklift/cloud.hpp"
#include "masklift/dataset.hpp"
#include "masklift/merge.hpp"
#include "masklift/overseg.hpp"

namespace masklift {

struct PipelineConfig {
  double voxel_size = 0.05;
  double delta = 0.5;
  /// Unset means "same as delta".
  std::optional<double> ensemble_delta;
  /// Non-positive means "same as voxel_size".
  double match_radius = 0.0;
  int stride = 1;
  int frame_stride = 1;
  std::size_t knn = 16;
  double fz_k = 0.1;
  std::size_t min_segment = 20;
  double depth_divisor = 1000.0;
  double max_depth = 10.0;
  bool no_ensemble = false;
  bool no_pool_after_merge = false;
  bool strict = false;
  /// 0 selects default_thread_count().
  unsigned threads = 0;
  std::uint64_t seed = 0;

  /// Throws kValidation naming the offending field.
  void validate() const;

  MergeConfig merge_config() const;
  MergeConfig ensemble_config() const;
  OversegConfig overseg_config() const;
  PoolConfig pool_config() const { return PoolConfig{voxel_size}; }
  FrameSampling sampling() const { return FrameSampling{stride, max_depth}; }
  LoadOptions load_options() const { return LoadOptions{depth_divisor, frame_stride, strict}; }
  unsigned effective_threads() const;

  /// Snapshot of every result-affecting field. The thread count is left out:
  /// it never changes results, and snapshots must not differ between
  /// otherwise identical runs.
  std::string to_json() const;
  /// Fields absent from the JSON keep their current values.
  void merge_json(const std::string& json_text);
};

enum class Stage { kLift, kMerge, kOverseg, kEnsemble };

std::optional<Stage> parse_stage(const std::string& name);

using ProgressFn = std::function<void(const std::string& stage, const std::string& message)>;

/// Lifts and pools every frame. Frames are processed in parallel; ID blocks
/// are assigned in frame order so results do not depend on the schedule.
std::vector<LabeledCloud> lift_scene(const SceneDataset& scene, const PipelineConfig& cfg,
                                     const ProgressFn& progress = {});

BottomUpResult merge_clouds(std::vector<LabeledCloud> clouds, const PipelineConfig& cfg);

Oversegmentation oversegment_scene(const LabeledCloud& scene, const PipelineConfig& cfg);

LabeledCloud ensemble_scene(const LabeledCloud& scene, const Oversegmentation& overseg,
                            const PipelineConfig& cfg);

std::string trace_to_json(const MergeTreeTrace& trace);

struct OutputBundle {
  std::vector<LabeledCloud> lifted;   // filled when stopping after lift
  LabeledCloud scene;                 // merged scene masks
  LabeledCloud final_cloud;           // ensembled (or scene when ensemble is off)
  std::optional<Oversegmentation> overseg;
  MergeTreeTrace trace;
  std::string config_snapshot;
  std::optional<Stage> stopped_after;
};

/// File names written by run() into the output directory.
namespace outputs {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kLiftDir = "lift";
inline constexpr const char* kScene = "scene_sam3d.ply";
inline constexpr const char* kTrace = "merge_trace.json";
inline constexpr const char* kOverseg = "overseg.txt";
inline constexpr const char* kFinal = "scene_final.ply";
}  // namespace outputs

/// Full pipeline: load, lift, merge, over-segment, ensemble, export. The
/// scene is loaded before anything is written, so a load failure leaves no
/// partial outputs.
OutputBundle run_pipeline(const std::filesystem::path& scene_root, const PipelineConfig& cfg,
                          const std::filesystem::path& out_dir,
                          std::optional<Stage> stop_after = std::nullopt,
                          const ProgressFn& progress = {});

/// Writes one PLY per lifted frame into `dir` (000000.ply, ...).
void write_lifted(const std::vector<LabeledCloud>& clouds, const std::filesystem::path& dir);
/// Reads every *.ply in `dir`, sorted by file name.
std::vector<LabeledCloud> read_lifted(const std::filesystem::path& dir);

}  // namespace masklift
