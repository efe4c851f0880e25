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

// Inverse projection of points onto baselines: base point, signed height
// along the detail direction field, curvilinear ratio and sin(beta).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bskin/baseline.hpp"
#include "bskin/error.hpp"
#include "bskin/sphere_mesh.hpp"

namespace bskin {

enum EncodeFlag : std::uint32_t {
  kFlagOnCap = 1u << 0,
  /// Stored in bone-local coordinates: azimuth in `azimuth`, axial coordinate
  /// from the start sphere center in `t`, radial distance in `h`.
  kFlagRigid = 1u << 1,
  kFlagAxisDegenerate = 1u << 2,
  kFlagApexRegion = 1u << 3,
};

struct EncodedPoint {
  std::uint64_t point_index = 0;
  std::uint32_t chain_id = 0;
  std::uint32_t bone_id = 0;
  double azimuth = 0.0;
  std::uint32_t section = 0;
  double t = 0.0;
  double h = 0.0;
  double sin_beta = 1.0;
  std::uint32_t flags = 0;

  bool on_cap() const { return (flags & kFlagOnCap) != 0; }
  bool rigid() const { return (flags & kFlagRigid) != 0; }
};

/// Floor applied to sin(beta).
inline constexpr double kEpsSin = 1e-6;

struct DirectionSample {
  Vec3 base;
  Vec3 dir;             // detail direction, unit, outward
  Vec3 surface_normal;  // sphere-mesh normal at `base`
  double sin_beta() const { return dot(dir, surface_normal); }
};

/// Detail direction field over one segment of a portion. Directions are the
/// rays from I, the intersection of the endpoint direction lines in the
/// segment's meridian plane; with parallel endpoint directions the field is
/// constant.
struct SegmentField {
  Vec3 e0, e1;          // segment endpoints
  Vec3 d0, d1;          // endpoint directions
  double s0 = 1.0;      // e0 + s0 d0 = I = e1 + s1 d1
  double s1 = 1.0;
  bool parallel = true;
  Vec3 cone_normal;
  Vec3 plane_normal;    // meridian plane

  Vec3 direction(double u) const;
  /// Parameter u along [e0, e1] and height h with p = lerp(e0, e1, u) + h
  /// direction(u). Returns nullopt if p is at or beyond I.
  std::optional<std::pair<double, double>> invert(const Vec3& p) const;
};

SegmentField segment_field(const Skeleton& sk, const BaselinePortion& portion, int element);

/// Detail direction at arclength `s` of the portion.
DirectionSample direction_at(const Skeleton& sk, const BaselinePortion& portion, double s);

/// Encodes one point registered to bone index `bone`. Points that cannot be
/// attached to a baseline are stored rigidly (kFlagRigid) together with the
/// reason flag.
EncodedPoint project_point(const Skeleton& sk, int bone, const Vec3& p, std::uint64_t index = 0);

struct PointIssue {
  std::uint64_t point_index = 0;
  ErrorCode code = ErrorCode::kApexRegion;
  std::string message;
};

struct EncodeResult {
  std::vector<EncodedPoint> points;
  std::vector<PointIssue> issues;
};

EncodeResult encode_cloud(const Skeleton& sk, const Registration& registration, const std::vector<Vec3>& points,
                          unsigned threads = 0);

/// Reconstructs a point on the skeleton it was encoded on (or any posed copy
/// when the pose is rigid per bone); exact inverse of project_point at rest.
Vec3 decode_rest(const Skeleton& sk, const EncodedPoint& e);

}  // namespace bskin
