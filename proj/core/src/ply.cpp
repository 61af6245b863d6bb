#include "masklift/ply.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "masklift/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "PLY writer assumes a little-endian host");

namespace masklift {

std::array<std::uint8_t, 3> label_color(Label label) {
  if (label == kUnlabeled) return {128, 128, 128};
  // splitmix-style scramble, then keep colors away from black.
  std::uint64_t x = label + 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return {static_cast<std::uint8_t>(64 + (x & 0xff) % 192),
          static_cast<std::uint8_t>(64 + ((x >> 8) & 0xff) % 192),
          static_cast<std::uint8_t>(64 + ((x >> 16) & 0xff) % 192)};
}

void write_ply(const LabeledCloud& cloud, const std::filesystem::path& path) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());

  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar red\n"
      << "property uchar green\n"
      << "property uchar blue\n"
      << "property uint label\n"
      << "end_header\n";

  constexpr std::size_t kStride = 3 * sizeof(float) + 3 + sizeof(std::uint32_t);
  std::vector<char> buffer(cloud.size() * kStride);
  char* dst = buffer.data();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                          static_cast<float>(cloud.points[i].y()),
                          static_cast<float>(cloud.points[i].z())};
    std::memcpy(dst, xyz, sizeof(xyz));
    dst += sizeof(xyz);
    const auto rgb = label_color(cloud.labels[i]);
    std::memcpy(dst, rgb.data(), 3);
    dst += 3;
    const std::uint32_t label = cloud.labels[i];
    std::memcpy(dst, &label, sizeof(label));
    dst += sizeof(label);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

namespace {

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

struct Property {
  std::string name;
  ScalarType type;
};

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

bool parse_type(const std::string& s, ScalarType& t) {
  if (s == "char" || s == "int8") t = ScalarType::kInt8;
  else if (s == "uchar" || s == "uint8") t = ScalarType::kUInt8;
  else if (s == "short" || s == "int16") t = ScalarType::kInt16;
  else if (s == "ushort" || s == "uint16") t = ScalarType::kUInt16;
  else if (s == "int" || s == "int32") t = ScalarType::kInt32;
  else if (s == "uint" || s == "uint32") t = ScalarType::kUInt32;
  else if (s == "float" || s == "float32") t = ScalarType::kFloat32;
  else if (s == "double" || s == "float64") t = ScalarType::kFloat64;
  else return false;
  return true;
}

template <typename T>
T load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double decode(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::kInt8: return load<std::int8_t>(p);
    case ScalarType::kUInt8: return load<std::uint8_t>(p);
    case ScalarType::kInt16: return load<std::int16_t>(p);
    case ScalarType::kUInt16: return load<std::uint16_t>(p);
    case ScalarType::kInt32: return load<std::int32_t>(p);
    case ScalarType::kUInt32: return load<std::uint32_t>(p);
    case ScalarType::kFloat32: return load<float>(p);
    case ScalarType::kFloat64: return load<double>(p);
  }
  return 0.0;
}

[[noreturn]] void header_error(const std::filesystem::path& path, int line,
                               const std::string& what) {
  throw Error(ErrorCode::kParse,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

LabeledCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());

  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") header_error(path, 1, "missing 'ply' magic");

  bool binary = false;
  bool have_format = false;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  std::vector<Property> props;
  // Elements declared before "vertex" would have to be skipped; only files
  // whose first element is vertex are supported.
  while (true) {
    if (!next_line()) header_error(path, line_no + 1, "unexpected end of header");
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else header_error(path, line_no, "unsupported format '" + fmt + "'");
      have_format = true;
    } else if (keyword == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (name.empty() || count < 0) header_error(path, line_no, "malformed element line");
      if (name == "vertex") {
        if (seen_vertex) header_error(path, line_no, "duplicate vertex element");
        seen_vertex = true;
        in_vertex = true;
        vertex_count = static_cast<std::size_t>(count);
      } else {
        if (!seen_vertex) header_error(path, line_no, "element '" + name + "' precedes vertex");
        in_vertex = false;
      }
    } else if (keyword == "property") {
      std::string type_name, name;
      ls >> type_name;
      if (type_name == "list") {
        if (in_vertex) header_error(path, line_no, "list properties on vertices are unsupported");
        continue;
      }
      ls >> name;
      ScalarType t;
      if (!parse_type(type_name, t) || name.empty()) {
        header_error(path, line_no, "malformed property line");
      }
      if (!seen_vertex) header_error(path, line_no, "property outside an element");
      if (in_vertex) props.push_back({name, t});
    } else {
      header_error(path, line_no, "unknown header keyword '" + keyword + "'");
    }
  }
  if (!have_format) header_error(path, line_no, "missing format line");
  if (!seen_vertex) header_error(path, line_no, "missing vertex element");

  int ix = -1, iy = -1, iz = -1, il = -1;
  for (int k = 0; k < static_cast<int>(props.size()); ++k) {
    if (props[k].name == "x") ix = k;
    if (props[k].name == "y") iy = k;
    if (props[k].name == "z") iz = k;
    if (props[k].name == "label") il = k;
  }
  if (ix < 0 || iy < 0 || iz < 0) header_error(path, line_no, "vertex lacks x/y/z");
  if (il < 0) header_error(path, line_no, "vertex lacks a label property");

  LabeledCloud cloud;
  cloud.points.resize(vertex_count);
  cloud.labels.resize(vertex_count);
  std::vector<double> values(props.size());

  if (binary) {
    std::vector<std::size_t> offset(props.size());
    std::size_t stride = 0;
    for (std::size_t k = 0; k < props.size(); ++k) {
      offset[k] = stride;
      stride += type_size(props[k].type);
    }
    std::vector<char> data(vertex_count * stride);
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
      throw Error(ErrorCode::kParse, path.string() + ": truncated vertex data");
    }
    for (std::size_t i = 0; i < vertex_count; ++i) {
      const char* row = data.data() + i * stride;
      cloud.points[i] = {decode(props[ix].type, row + offset[ix]),
                         decode(props[iy].type, row + offset[iy]),
                         decode(props[iz].type, row + offset[iz])};
      cloud.labels[i] = static_cast<Label>(decode(props[il].type, row + offset[il]));
    }
  } else {
    for (std::size_t i = 0; i < vertex_count; ++i) {
      for (auto& v : values) {
        if (!(in >> v)) {
          throw Error(ErrorCode::kParse,
                      path.string() + ": truncated ASCII vertex " + std::to_string(i));
        }
      }
      cloud.points[i] = {values[ix], values[iy], values[iz]};
      cloud.labels[i] = static_cast<Label>(values[il]);
    }
  }
  return cloud;
}

}  // namespace masklift
