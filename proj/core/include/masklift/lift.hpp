#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <vector>

#include "masklift/camera.hpp"
#include "masklift/cloud.hpp"

namespace masklift {

using LocalId = std::uint32_t;

/// Flattened per-pixel mask labels for one frame (0 = unlabeled) plus a
/// confidence per frame-local ID.
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<LocalId> labels;
  std::map<LocalId, double> confidences;

  LocalId at(int u, int v) const {
    return labels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)];
  }
  /// Throws kMalformedInput when a nonzero label lacks a confidence, label 0
  /// has one, or the buffer size disagrees with the dimensions.
  void validate() const;
};

struct BinaryMask {
  std::vector<std::uint8_t> pixels;  // nonzero = member
  double confidence = 0.0;
};

/// Possibly overlapping masks of one image. Mask k gets frame-local ID k + 1.
struct RawMaskSet {
  int width = 0;
  int height = 0;
  std::vector<BinaryMask> masks;
};

/// Assigns each pixel to its covering mask of highest confidence; ties go to
/// the smaller frame-local ID.
MaskImage resolve_overlaps(const RawMaskSet& raw);

/// A contiguous run of global IDs reserved for one frame.
struct IdBlock {
  Label first = 1;
  std::uint32_t count = 0;
};

/// Issues globally unique, strictly increasing, nonzero mask IDs. Thread safe.
class IdAllocator {
 public:
  explicit IdAllocator(Label first = 1) : next_(first == 0 ? 1 : first) {}

  IdBlock reserve(std::uint32_t count);
  Label peek() const noexcept { return next_.load(); }

 private:
  std::atomic<Label> next_;
};

/// Lifts the frame's masks into world space using IDs from `block`. Frame-local
/// IDs map to block IDs in ascending order; label 0 stays 0.
LabeledCloud lift_frame(const MaskImage& mask, const DepthFrame& frame,
                        const CameraIntrinsics& intr, const CameraPose& pose, IdBlock block,
                        const FrameSampling& sampling = {});

/// Same, reserving a block of `mask.confidences.size()` IDs from `alloc`.
LabeledCloud lift_frame(const MaskImage& mask, const DepthFrame& frame,
                        const CameraIntrinsics& intr, const CameraPose& pose,
                        IdAllocator& alloc, const FrameSampling& sampling = {});

}  // namespace masklift
