#include "masklift/lift.hpp"

#include <limits>
#include <string>
#include <unordered_map>

#include "masklift/error.hpp"

namespace masklift {

void MaskImage::validate() const {
  if (width < 0 || height < 0 ||
      labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kMalformedInput, "mask label buffer does not match its dimensions");
  }
  if (confidences.contains(0)) {
    throw Error(ErrorCode::kMalformedInput, "label 0 must not carry a confidence");
  }
  for (LocalId id : labels) {
    if (id != 0 && !confidences.contains(id)) {
      throw Error(ErrorCode::kMalformedInput,
                  "mask label " + std::to_string(id) + " has no confidence entry");
    }
  }
}

MaskImage resolve_overlaps(const RawMaskSet& raw) {
  const std::size_t n_pixels =
      static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height);
  if (raw.width < 0 || raw.height < 0) {
    throw Error(ErrorCode::kMalformedInput, "negative mask dimensions");
  }

  MaskImage out;
  out.width = raw.width;
  out.height = raw.height;
  out.labels.assign(n_pixels, 0);
  std::vector<double> best(n_pixels, -std::numeric_limits<double>::infinity());

  for (std::size_t k = 0; k < raw.masks.size(); ++k) {
    const auto& mask = raw.masks[k];
    if (mask.pixels.size() != n_pixels) {
      throw Error(ErrorCode::kMalformedInput,
                  "binary mask " + std::to_string(k) + " does not match the image size");
    }
    const auto id = static_cast<LocalId>(k + 1);
    out.confidences[id] = mask.confidence;
    // Masks are visited in ascending ID order, so a strict comparison keeps
    // the smaller ID on ties.
    for (std::size_t i = 0; i < n_pixels; ++i) {
      if (mask.pixels[i] != 0 && mask.confidence > best[i]) {
        best[i] = mask.confidence;
        out.labels[i] = id;
      }
    }
  }
  return out;
}

IdBlock IdAllocator::reserve(std::uint32_t count) {
  const Label first = next_.fetch_add(count);
  if (static_cast<std::uint64_t>(first) + count > std::numeric_limits<Label>::max()) {
    throw Error(ErrorCode::kPrecondition, "mask ID space exhausted");
  }
  return {first, count};
}

LabeledCloud lift_frame(const MaskImage& mask, const DepthFrame& frame,
                        const CameraIntrinsics& intr, const CameraPose& pose, IdBlock block,
                        const FrameSampling& sampling) {
  mask.validate();
  if (mask.width != frame.width || mask.height != frame.height) {
    throw Error(ErrorCode::kMalformedInput, "mask and depth frame dimensions differ");
  }
  if (mask.confidences.size() > block.count) {
    throw Error(ErrorCode::kPrecondition, "ID block is smaller than the frame's mask count");
  }

  std::unordered_map<LocalId, Label> to_global;
  Label next = block.first;
  for (const auto& [local, conf] : mask.confidences) {
    to_global.emplace(local, next++);
  }

  const auto pixels = unproject_frame(frame, intr, pose, sampling);
  LabeledCloud cloud;
  cloud.reserve(pixels.size());
  for (const auto& px : pixels) {
    const LocalId local = mask.at(px.u, px.v);
    cloud.push_back(px.point, local == 0 ? kUnlabeled : to_global.at(local));
  }
  return cloud;
}

LabeledCloud lift_frame(const MaskImage& mask, const DepthFrame& frame,
                        const CameraIntrinsics& intr, const CameraPose& pose,
                        IdAllocator& alloc, const FrameSampling& sampling) {
  mask.validate();
  const auto block = alloc.reserve(static_cast<std::uint32_t>(mask.confidences.size()));
  return lift_frame(mask, frame, intr, pose, block, sampling);
}

}  // namespace masklift
