#include "masklift/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <json.hpp>

#include "masklift/error.hpp"
#include "masklift/png_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace masklift {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Eigen::Matrix4d read_matrix4(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      throw Error(ErrorCode::kParse, path.string() + ": '" + token + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.size() != 16) {
    throw Error(ErrorCode::kParse, path.string() + ": expected 16 numbers, found " +
                                       std::to_string(values.size()));
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = values[static_cast<std::size_t>(r * 4 + c)];
  }
  return m;
}

void write_matrix4(const Eigen::Matrix4d& m, const fs::path& path) {
  std::string text;
  char buf[64];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      text += buf;
      text += c == 3 ? '\n' : ' ';
    }
  }
  write_text_file(path, text);
}

DepthFrame read_depth_png(const fs::path& path, double depth_divisor) {
  auto img = read_png_gray(path);
  if (img.bit_depth != 16) {
    throw Error(ErrorCode::kParse, path.string() + ": depth PNG must be 16-bit");
  }
  DepthFrame frame;
  frame.width = img.width;
  frame.height = img.height;
  frame.depth = std::move(img.pixels);
  frame.depth_divisor = depth_divisor;
  return frame;
}

void write_depth_png(const DepthFrame& frame, const fs::path& path) {
  frame.validate();
  write_png_gray(path, {frame.width, frame.height, 16, frame.depth});
}

MaskImage read_label_mask(const fs::path& png, const fs::path& confidence_json) {
  auto img = read_png_gray(png);
  MaskImage mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.labels.assign(img.pixels.begin(), img.pixels.end());

  json doc;
  try {
    doc = json::parse(read_text_file(confidence_json));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, confidence_json.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, confidence_json.string() + ": expected an object");
  }
  for (const auto& [key, value] : doc.items()) {
    LocalId id = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc() || ptr != key.data() + key.size() || !value.is_number()) {
      throw Error(ErrorCode::kParse,
                  confidence_json.string() + ": bad confidence entry '" + key + "'");
    }
    mask.confidences[id] = value.get<double>();
  }
  mask.validate();
  return mask;
}

void write_label_mask(const MaskImage& mask, const fs::path& png, const fs::path& confidence_json) {
  mask.validate();
  GrayImage img{mask.width, mask.height, 16, {}};
  img.pixels.reserve(mask.labels.size());
  for (LocalId id : mask.labels) {
    if (id > 0xffff) throw Error(ErrorCode::kIo, "mask ID does not fit a 16-bit PNG");
    img.pixels.push_back(static_cast<std::uint16_t>(id));
  }
  write_png_gray(png, img);
  json doc = json::object();
  for (const auto& [id, conf] : mask.confidences) doc[std::to_string(id)] = conf;
  write_text_file(confidence_json, doc.dump(2) + "\n");
}

RawMaskSet read_binary_masks(const fs::path& directory) {
  std::vector<fs::path> pngs;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") pngs.push_back(entry.path());
  }
  std::sort(pngs.begin(), pngs.end());

  const fs::path scores_path = directory / "scores.json";
  json scores;
  try {
    scores = json::parse(read_text_file(scores_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, scores_path.string() + ": " + e.what());
  }
  if (!scores.is_array() || scores.size() != pngs.size()) {
    throw Error(ErrorCode::kParse, scores_path.string() + ": expected a list of " +
                                       std::to_string(pngs.size()) + " scores");
  }

  RawMaskSet raw;
  for (std::size_t k = 0; k < pngs.size(); ++k) {
    const auto img = read_png_gray(pngs[k]);
    if (k == 0) {
      raw.width = img.width;
      raw.height = img.height;
    } else if (img.width != raw.width || img.height != raw.height) {
      throw Error(ErrorCode::kMalformedInput, pngs[k].string() + ": mask size differs");
    }
    BinaryMask mask;
    mask.confidence = scores[k].get<double>();
    mask.pixels.reserve(img.pixels.size());
    for (auto v : img.pixels) mask.pixels.push_back(v >= 128 ? 1 : 0);
    raw.masks.push_back(std::move(mask));
  }
  return raw;
}

namespace {

std::optional<long long> parse_frame_id(const std::string& stem) {
  long long id = 0;
  const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
  if (ec != std::errc() || ptr != stem.data() + stem.size() || id < 0) return std::nullopt;
  return id;
}

// Projects a nearly-orthonormal rotation block (text files carry limited
// precision) onto SO(3).
Eigen::Matrix4d orthonormalize(Eigen::Matrix4d m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d fixed = svd.matrixU() * svd.matrixV().transpose();
  m.topLeftCorner<3, 3>() = fixed;
  return m;
}

std::map<std::string, fs::path> list_by_stem(const fs::path& dir, const std::string& ext,
                                             bool want_dirs) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (want_dirs && entry.is_directory()) {
      out.emplace(entry.path().filename().string(), entry.path());
    } else if (!want_dirs && entry.is_regular_file() && entry.path().extension() == ext) {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

}  // namespace

SceneDataset load_scene(const fs::path& root, const LoadOptions& opts) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kLoad, "scene directory " + root.string() + " does not exist");
  }
  if (opts.frame_stride < 1) throw Error(ErrorCode::kConfig, "frame stride must be >= 1");
  if (!(opts.depth_divisor > 0.0)) throw Error(ErrorCode::kConfig, "depth divisor must be > 0");

  SceneDataset scene;
  scene.root = root;
  scene.depth_divisor = opts.depth_divisor;

  fs::path intrinsic_path = root / "intrinsic.txt";
  if (!fs::exists(intrinsic_path) && fs::exists(root / "intrinsic" / "intrinsic_depth.txt")) {
    intrinsic_path = root / "intrinsic" / "intrinsic_depth.txt";
  }
  if (!fs::exists(intrinsic_path)) {
    throw Error(ErrorCode::kLoad, "missing intrinsics file " + intrinsic_path.string());
  }
  try {
    scene.intrinsics = CameraIntrinsics::from_matrix(read_matrix4(intrinsic_path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kLoad, std::string("invalid intrinsics: ") + e.what());
  }

  auto problem = [&](const std::string& message) {
    if (opts.strict) throw Error(ErrorCode::kLoad, message);
    scene.warnings.push_back(message);
  };

  const auto depths = list_by_stem(root / "depth", ".png", false);
  const auto poses = list_by_stem(root / "pose", ".txt", false);
  const auto label_masks = list_by_stem(root / "masks", ".png", false);
  const auto mask_dirs = list_by_stem(root / "masks", "", true);

  std::set<std::string> stems;
  for (const auto* m : {&depths, &poses, &label_masks, &mask_dirs}) {
    for (const auto& [stem, path] : *m) stems.insert(stem);
  }

  std::vector<FrameRecord> records;
  std::set<long long> ids;
  for (const auto& stem : stems) {
    const auto id = parse_frame_id(stem);
    if (!id) {
      problem("frame '" + stem + "': basename is not an integer frame id; skipped");
      continue;
    }
    if (!ids.insert(*id).second) {
      problem("frame '" + stem + "': duplicate frame id " + std::to_string(*id) + "; skipped");
      continue;
    }
    FrameRecord rec;
    rec.id = *id;
    rec.basename = stem;
    std::vector<std::string> missing;
    if (auto it = depths.find(stem); it != depths.end()) rec.depth_path = it->second;
    else missing.push_back("depth");
    if (auto it = poses.find(stem); it != poses.end()) rec.pose_path = it->second;
    else missing.push_back("pose");
    if (auto it = label_masks.find(stem); it != label_masks.end()) {
      rec.mask_path = it->second;
      rec.mask_source = MaskSource::kLabelImage;
      if (!fs::exists(root / "masks" / (stem + ".json"))) missing.push_back("mask confidences");
    } else if (auto dit = mask_dirs.find(stem); dit != mask_dirs.end()) {
      rec.mask_path = dit->second;
      rec.mask_source = MaskSource::kBinaryMasks;
    } else {
      missing.push_back("mask");
    }
    if (!missing.empty()) {
      std::string what;
      for (const auto& m : missing) what += (what.empty() ? "" : ", ") + m;
      problem("frame '" + stem + "': missing " + what + "; skipped");
      continue;
    }
    try {
      Eigen::Matrix4d m = read_matrix4(rec.pose_path);
      if (!m.allFinite()) throw Error(ErrorCode::kParse, "non-finite pose");
      const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
      if (((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().array() > 1e-4).any() ||
          std::abs(r.determinant() - 1.0) > 1e-4) {
        throw Error(ErrorCode::kInvalidPose, "rotation block is not a rotation");
      }
      rec.pose = CameraPose::from_world_from_camera(orthonormalize(m));
    } catch (const Error& e) {
      problem("frame '" + stem + "': unusable pose (" + e.what() + "); skipped");
      continue;
    }
    records.push_back(std::move(rec));
  }

  std::sort(records.begin(), records.end(),
            [](const FrameRecord& a, const FrameRecord& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < records.size(); i += static_cast<std::size_t>(opts.frame_stride)) {
    scene.frames.push_back(std::move(records[i]));
  }
  if (scene.frames.empty()) {
    throw Error(ErrorCode::kLoad, "scene " + root.string() + " has no usable frames");
  }
  return scene;
}

LoadedFrame load_frame(const SceneDataset& scene, const FrameRecord& record) {
  LoadedFrame out;
  out.depth = read_depth_png(record.depth_path, scene.depth_divisor);
  if (record.mask_source == MaskSource::kLabelImage) {
    fs::path json_path = record.mask_path;
    json_path.replace_extension(".json");
    out.mask = read_label_mask(record.mask_path, json_path);
  } else {
    out.mask = resolve_overlaps(read_binary_masks(record.mask_path));
    if (out.mask.labels.empty()) {
      // No binary masks at all: an unlabeled frame of the depth size.
      out.mask.width = out.depth.width;
      out.mask.height = out.depth.height;
      out.mask.labels.assign(out.depth.depth.size(), 0);
    }
  }
  if (out.mask.width != out.depth.width || out.mask.height != out.depth.height) {
    throw Error(ErrorCode::kMalformedInput,
                "frame '" + record.basename + "': mask and depth dimensions differ");
  }
  return out;
}

void write_segments(const std::vector<std::uint32_t>& segment_id, const fs::path& path) {
  std::string text;
  text.reserve(segment_id.size() * 4);
  for (auto s : segment_id) {
    text += std::to_string(s);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<std::uint32_t> read_segments(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::uint32_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": not a segment id");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace masklift
