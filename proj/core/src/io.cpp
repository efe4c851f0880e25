// Copyright 2026 The bskin Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bskin/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bskin/error.hpp"

namespace bskin {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

bool ends_with(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
  return tail == suffix;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

bool to_double(std::string_view s, double& v) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

// Bounds-checked little-endian reader.
struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;
  const char* what = "buffer";

  template <class T>
  T get() {
    if (bytes.size() - pos < sizeof(T) || pos > bytes.size()) {
      parse_error(std::string(what) + ": truncated at byte " + std::to_string(pos));
    }
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::kI8;
  if (s == "uchar" || s == "uint8") return PlyType::kU8;
  if (s == "short" || s == "int16") return PlyType::kI16;
  if (s == "ushort" || s == "uint16") return PlyType::kU16;
  if (s == "int" || s == "int32") return PlyType::kI32;
  if (s == "uint" || s == "uint32") return PlyType::kU32;
  if (s == "float" || s == "float32") return PlyType::kF32;
  if (s == "double" || s == "float64") return PlyType::kF64;
  return std::nullopt;
}

double read_binary(Reader& r, PlyType t) {
  switch (t) {
    case PlyType::kI8: return r.get<std::int8_t>();
    case PlyType::kU8: return r.get<std::uint8_t>();
    case PlyType::kI16: return r.get<std::int16_t>();
    case PlyType::kU16: return r.get<std::uint16_t>();
    case PlyType::kI32: return r.get<std::int32_t>();
    case PlyType::kU32: return r.get<std::uint32_t>();
    case PlyType::kF32: return r.get<float>();
    case PlyType::kF64: return r.get<double>();
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kF32;
  bool is_list = false;
  PlyType count_type = PlyType::kU8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

struct VertexSlots {
  int x = -1, y = -1, z = -1, r = -1, g = -1, b = -1;
};

VertexSlots vertex_slots(const PlyElement& e) {
  VertexSlots s;
  for (std::size_t i = 0; i < e.props.size(); ++i) {
    const PlyProperty& p = e.props[i];
    if (p.is_list) continue;
    const int k = static_cast<int>(i);
    const bool fp = p.type == PlyType::kF32 || p.type == PlyType::kF64;
    if (p.name == "x" || p.name == "y" || p.name == "z") {
      if (!fp) throw Error(ErrorCode::kUnsupportedFormat, "ply: vertex " + p.name + " must be float or double");
      (p.name == "x" ? s.x : p.name == "y" ? s.y : s.z) = k;
    }
    if (p.type == PlyType::kU8) {
      if (p.name == "red") s.r = k;
      if (p.name == "green") s.g = k;
      if (p.name == "blue") s.b = k;
    }
  }
  if (s.x < 0 || s.y < 0 || s.z < 0) parse_error("ply: vertex element lacks x, y or z");
  return s;
}

void store_vertex(PointCloud& c, const VertexSlots& s, const std::vector<double>& v, bool colors) {
  const Vec3 p{v[static_cast<std::size_t>(s.x)], v[static_cast<std::size_t>(s.y)], v[static_cast<std::size_t>(s.z)]};
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    parse_error("ply: vertex " + std::to_string(c.positions.size()) + " is not finite");
  }
  c.positions.push_back(p);
  if (colors) {
    c.colors.push_back({static_cast<std::uint8_t>(v[static_cast<std::size_t>(s.r)]),
                        static_cast<std::uint8_t>(v[static_cast<std::size_t>(s.g)]),
                        static_cast<std::uint8_t>(v[static_cast<std::size_t>(s.b)])});
  }
}

}  // namespace

CloudFormat format_for_path(const std::string& path) {
  if (ends_with(path, ".xyz")) return CloudFormat::kXyz;
  if (ends_with(path, ".ply")) return CloudFormat::kPlyBinary;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown point-cloud extension: " + path);
}

PointCloud parse_xyz(std::string_view text) {
  PointCloud c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool colors = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const std::size_t h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3 && tok.size() != 6) {
      parse_error("xyz: line " + std::to_string(line_no) + ": expected 3 or 6 values");
    }
    double v[6];
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (!to_double(tok[i], v[i]) || !std::isfinite(v[i])) {
        parse_error("xyz: line " + std::to_string(line_no) + ": bad number '" + std::string(tok[i]) + "'");
      }
    }
    const bool has_color = tok.size() == 6;
    if (c.positions.empty()) colors = has_color;
    if (has_color != colors) parse_error("xyz: line " + std::to_string(line_no) + ": mixed color columns");
    c.positions.push_back({v[0], v[1], v[2]});
    if (colors) {
      for (int k = 3; k < 6; ++k) {
        if (v[k] < 0 || v[k] > 255 || v[k] != std::floor(v[k])) {
          parse_error("xyz: line " + std::to_string(line_no) + ": color out of range");
        }
      }
      c.colors.push_back({static_cast<std::uint8_t>(v[3]), static_cast<std::uint8_t>(v[4]),
                          static_cast<std::uint8_t>(v[5])});
    }
  }
  return c;
}

std::string write_xyz(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.positions.size() * 72);
  char buf[128];
  const bool colors = cloud.colors.size() == cloud.positions.size() && !cloud.colors.empty();
  for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x, p.y, p.z);
    out.append(buf, static_cast<std::size_t>(n));
    if (colors) {
      n = std::snprintf(buf, sizeof buf, " %d %d %d", cloud.colors[i][0], cloud.colors[i][1], cloud.colors[i][2]);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

PointCloud parse_ply(std::string_view bytes) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size()) parse_error("ply: header ends before end_header (line " + std::to_string(line_no) + ")");
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = std::min(bytes.size(), nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };
  if (next_line() != "ply") parse_error("ply: line 1: missing 'ply' magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string_view line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = "ply: line " + std::to_string(line_no) + ": ";
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) parse_error(where + "malformed format line");
      if (tok[1] == "ascii") {
        binary = false;
      } else if (tok[1] == "binary_little_endian") {
        binary = true;
      } else {
        throw Error(ErrorCode::kUnsupportedFormat, where + "unsupported encoding " + std::string(tok[1]));
      }
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) parse_error(where + "malformed element line");
      PlyElement e;
      e.name = std::string(tok[1]);
      const auto r = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (r.ec != std::errc() || r.ptr != tok[2].data() + tok[2].size()) parse_error(where + "bad element count");
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) parse_error(where + "property before any element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = ply_type(tok[2]);
        const auto it = ply_type(tok[3]);
        if (!ct || !it) parse_error(where + "unknown list type");
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
        p.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        const auto t = ply_type(tok[1]);
        if (!t) parse_error(where + "unknown property type " + std::string(tok[1]));
        p.type = *t;
        p.name = std::string(tok[2]);
      } else {
        parse_error(where + "malformed property line");
      }
      elements.back().props.push_back(std::move(p));
    } else {
      parse_error(where + "unexpected header keyword " + std::string(tok[0]));
    }
  }
  if (!have_format) parse_error("ply: missing format line");

  PointCloud c;
  if (!binary) {
    for (const PlyElement& e : elements) {
      const bool is_vertex = e.name == "vertex";
      VertexSlots slots;
      bool colors = false;
      if (is_vertex) {
        slots = vertex_slots(e);
        colors = slots.r >= 0 && slots.g >= 0 && slots.b >= 0;
        c.positions.reserve(e.count);
      }
      std::vector<double> vals(e.props.size());
      for (std::size_t i = 0; i < e.count; ++i) {
        std::string_view line;
        do {
          if (pos >= bytes.size()) parse_error("ply: line " + std::to_string(line_no + 1) + ": missing data");
          line = next_line();
        } while (split_ws(line).empty());
        if (!is_vertex) continue;
        const auto tok = split_ws(line);
        const std::string where = "ply: line " + std::to_string(line_no) + ": ";
        std::size_t k = 0;
        for (std::size_t p = 0; p < e.props.size(); ++p) {
          if (k >= tok.size()) parse_error(where + "too few values");
          if (e.props[p].is_list) {
            double n;
            if (!to_double(tok[k++], n) || n < 0) parse_error(where + "bad list count");
            k += static_cast<std::size_t>(n);
            continue;
          }
          if (!to_double(tok[k++], vals[p])) parse_error(where + "bad number");
        }
        store_vertex(c, slots, vals, colors);
      }
    }
    return c;
  }

  Reader r{bytes, pos, "ply"};
  for (const PlyElement& e : elements) {
    const bool is_vertex = e.name == "vertex";
    VertexSlots slots;
    bool colors = false;
    if (is_vertex) {
      slots = vertex_slots(e);
      colors = slots.r >= 0 && slots.g >= 0 && slots.b >= 0;
      c.positions.reserve(e.count);
    }
    std::vector<double> vals(e.props.size());
    for (std::size_t i = 0; i < e.count; ++i) {
      for (std::size_t p = 0; p < e.props.size(); ++p) {
        const PlyProperty& prop = e.props[p];
        if (prop.is_list) {
          const double n = read_binary(r, prop.count_type);
          if (n < 0) parse_error("ply: byte " + std::to_string(r.pos) + ": negative list count");
          for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) read_binary(r, prop.type);
          continue;
        }
        vals[p] = read_binary(r, prop.type);
      }
      if (is_vertex) store_vertex(c, slots, vals, colors);
    }
    if (is_vertex) break;
  }
  return c;
}

std::string write_ply(const PointCloud& cloud, bool binary) {
  const bool colors = !cloud.colors.empty() && cloud.colors.size() == cloud.positions.size();
  std::ostringstream h;
  h << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
    << "element vertex " << cloud.positions.size() << "\n"
    << "property double x\nproperty double y\nproperty double z\n";
  if (colors) h << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  h << "end_header\n";
  std::string out = h.str();
  if (binary) {
    out.reserve(out.size() + cloud.positions.size() * (24 + (colors ? 3 : 0)));
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
      put(out, cloud.positions[i].x);
      put(out, cloud.positions[i].y);
      put(out, cloud.positions[i].z);
      if (colors) out.append(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    }
    return out;
  }
  char buf[128];
  for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x, p.y, p.z);
    out.append(buf, static_cast<std::size_t>(n));
    if (colors) {
      n = std::snprintf(buf, sizeof buf, " %d %d %d", cloud.colors[i][0], cloud.colors[i][1], cloud.colors[i][2]);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
}

PointCloud load_cloud(const std::string& path, std::optional<CloudFormat> format) {
  const std::string bytes = read_file(path);
  if (format) return *format == CloudFormat::kXyz ? parse_xyz(bytes) : parse_ply(bytes);
  if (bytes.rfind("ply", 0) == 0) return parse_ply(bytes);
  return parse_xyz(bytes);
}

void save_cloud(const PointCloud& cloud, const std::string& path, std::optional<CloudFormat> format) {
  const CloudFormat f = format ? *format : format_for_path(path);
  write_file(path, f == CloudFormat::kXyz ? write_xyz(cloud) : write_ply(cloud, f == CloudFormat::kPlyBinary));
}

// ---------------------------------------------------------------------------
// Encoded sets

namespace {
constexpr char kMagic[4] = {'B', 'S', 'K', 'N'};
constexpr std::uint32_t kEncodedVersion = 1;
constexpr std::size_t kRecordBytes = 8 + 4 + 4 + 8 + 4 + 8 + 8 + 8 + 4;
}  // namespace

std::string serialize_encoded(const EncodedSet& set) {
  std::string out;
  out.reserve(16 + set.points.size() * kRecordBytes + 8);
  out.append(kMagic, 4);
  put(out, kEncodedVersion);
  put(out, static_cast<std::uint64_t>(set.points.size()));
  for (const EncodedPoint& p : set.points) {
    put(out, p.point_index);
    put(out, p.chain_id);
    put(out, p.bone_id);
    put(out, p.azimuth);
    put(out, p.section);
    put(out, p.t);
    put(out, p.h);
    put(out, p.sin_beta);
    put(out, p.flags);
  }
  put(out, set.skeleton_fingerprint);
  return out;
}

EncodedSet deserialize_encoded(std::string_view bytes) {
  Reader r{bytes, 0, "encoded set"};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) parse_error("encoded set: bad magic");
  r.pos = 4;
  const auto version = r.get<std::uint32_t>();
  if (version != kEncodedVersion) parse_error("encoded set: unsupported version " + std::to_string(version));
  const auto count = r.get<std::uint64_t>();
  if (count > (bytes.size() - r.pos) / kRecordBytes) parse_error("encoded set: count exceeds file size");
  EncodedSet set;
  set.points.resize(static_cast<std::size_t>(count));
  for (EncodedPoint& p : set.points) {
    p.point_index = r.get<std::uint64_t>();
    p.chain_id = r.get<std::uint32_t>();
    p.bone_id = r.get<std::uint32_t>();
    p.azimuth = r.get<double>();
    p.section = r.get<std::uint32_t>();
    p.t = r.get<double>();
    p.h = r.get<double>();
    p.sin_beta = r.get<double>();
    p.flags = r.get<std::uint32_t>();
  }
  set.skeleton_fingerprint = r.get<std::uint64_t>();
  if (r.pos != bytes.size()) parse_error("encoded set: trailing bytes at " + std::to_string(r.pos));
  return set;
}

void save_encoded(const EncodedSet& set, const std::string& path) { write_file(path, serialize_encoded(set)); }

EncodedSet load_encoded(const std::string& path) { return deserialize_encoded(read_file(path)); }

// ---------------------------------------------------------------------------
// Binary point transport

std::string points_to_binary(const std::vector<Vec3>& points, std::size_t lod) {
  const std::size_t n = points.size();
  const std::size_t stride = lod == 0 || lod >= n ? 1 : (n + lod - 1) / lod;
  const std::size_t count = n == 0 ? 0 : (n + stride - 1) / stride;
  std::string out;
  out.reserve(4 + 12 * count);
  put(out, static_cast<std::uint32_t>(count));
  for (std::size_t i = 0; i < n; i += stride) {
    put(out, static_cast<float>(points[i].x));
    put(out, static_cast<float>(points[i].y));
    put(out, static_cast<float>(points[i].z));
  }
  return out;
}

std::vector<Vec3> points_from_binary(std::string_view bytes) {
  Reader r{bytes, 0, "point buffer"};
  const auto count = r.get<std::uint32_t>();
  if (bytes.size() != 4 + 12 * static_cast<std::size_t>(count)) parse_error("point buffer: length mismatch");
  std::vector<Vec3> out(count);
  for (Vec3& p : out) {
    p.x = r.get<float>();
    p.y = r.get<float>();
    p.z = r.get<float>();
  }
  return out;
}

}  // namespace bskin
