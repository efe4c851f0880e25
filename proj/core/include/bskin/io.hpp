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

// Point-cloud files (XYZ, PLY), the encoded-set file and the binary point
// transport format.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bskin/geom.hpp"
#include "bskin/pipeline.hpp"

namespace bskin {

struct PointCloud {
  std::vector<Vec3> positions;
  /// Empty, or one RGB triple per position.
  std::vector<std::array<std::uint8_t, 3>> colors;
};

enum class CloudFormat { kXyz, kPlyAscii, kPlyBinary };

/// Format implied by the file extension (.xyz, .ply -> binary PLY).
/// Throws Error(kUnsupportedFormat).
CloudFormat format_for_path(const std::string& path);

/// "x y z [r g b]" per line; blank lines and '#' comments skipped.
/// Throws Error(kParseError) naming the line.
PointCloud parse_xyz(std::string_view text);
/// 17 significant digits per coordinate.
std::string write_xyz(const PointCloud& cloud);

/// ASCII or binary little-endian PLY; the vertex element must carry float or
/// double x, y, z. Other properties and elements are skipped, except uchar
/// red/green/blue which are kept. Throws Error(kParseError) with the line or
/// byte offset, Error(kUnsupportedFormat) for other encodings.
PointCloud parse_ply(std::string_view bytes);
/// Double-precision coordinates; colors when present.
std::string write_ply(const PointCloud& cloud, bool binary);

/// Reads by content for PLY (magic "ply") and as XYZ otherwise, unless a
/// format is given. Throws Error(kIoError) when the file cannot be read.
PointCloud load_cloud(const std::string& path, std::optional<CloudFormat> format = std::nullopt);
/// Throws Error(kIoError).
void save_cloud(const PointCloud& cloud, const std::string& path, std::optional<CloudFormat> format = std::nullopt);

/// Little-endian: "BSKN", version u32, count u64, the points, then the
/// skeleton fingerprint u64.
std::string serialize_encoded(const EncodedSet& set);
/// Throws Error(kParseError) on a truncated or foreign buffer.
EncodedSet deserialize_encoded(std::string_view bytes);
void save_encoded(const EncodedSet& set, const std::string& path);
EncodedSet load_encoded(const std::string& path);

/// count u32 then count x 3 f32, little-endian, keeping every ceil(n/lod)-th
/// point from the first (all points when lod is 0 or >= n).
std::string points_to_binary(const std::vector<Vec3>& points, std::size_t lod = 0);
std::vector<Vec3> points_from_binary(std::string_view bytes);

/// Whole file as bytes. Throws Error(kIoError).
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace bskin
