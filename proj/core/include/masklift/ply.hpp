#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "masklift/cloud.hpp"

namespace masklift {

/// Binary little-endian PLY: float x y z, uchar red green blue, uint label.
void write_ply(const LabeledCloud& cloud, const std::filesystem::path& path);

/// Reads binary little-endian or ASCII PLY files carrying x, y, z and label
/// vertex properties. Other scalar properties are skipped. Header errors
/// report their line number.
LabeledCloud read_ply(const std::filesystem::path& path);

/// Deterministic display color for a label; label 0 is gray.
std::array<std::uint8_t, 3> label_color(Label label);

}  // namespace masklift
