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

// Sphere-mesh skeleton: spheres joined by 1D bones, each bone being the
// union of spheres swept along its axis with a linearly varying radius, i.e.
// two end spheres and their common tangent cone.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bskin/geom.hpp"

namespace bskin {

struct SphereNode {
  int id = 0;
  Vec3 center;
  double radius = 1.0;
};

/// Point in homogeneous coordinates; w == 0 encodes a direction (the apex of a
/// cylinder sits at infinity along its axis).
struct HomPoint {
  Vec3 xyz;
  double w = 1.0;

  bool at_infinity() const { return w == 0.0; }
  Vec3 point() const { return xyz / w; }
};

struct ConeGeometry {
  Vec3 axis_dir;            // unit, start -> end
  double sin_alpha = 0.0;   // (r1 - r2) / l
  double cos_alpha = 1.0;
  double half_angle = 0.0;  // asin(sin_alpha), signed
  std::optional<Vec3> apex; // absent for cylinders
  HomPoint apex_h;          // apex, or the axis direction for cylinders
  Circle tangency_start;
  Circle tangency_end;

  bool is_cylinder() const { return !apex.has_value(); }
};

/// Tangent cone of two spheres. Throws Error(kNestedSpheres) when the spheres
/// are nested (no external tangent cone). `eps_r` is the cylinder threshold.
ConeGeometry derive_cone(const SphereNode& s1, const SphereNode& s2, double eps_r = 0.0);

struct Bone {
  int id = 0;
  int start = 0;  // sphere index
  int end = 0;    // sphere index
  double length = 0.0;
  ConeGeometry cone;
  /// Unit reference vector orthogonal to the axis; azimuths are measured from
  /// it, counter-clockwise about the axis. Carried rigidly by poses.
  Vec3 frame_ref;
  /// Rest -> current rotation of the bone (own twist excluded).
  Mat3 rotation;
  /// Own twist of the bone in the current pose.
  double twist = 0.0;

  // Tree bookkeeping.
  int parent = -1;             // parent bone index, -1 for the root
  bool start_is_proximal = true;
  int chain = 0;

  int sphere_at(int end_index) const { return end_index == 0 ? start : end; }
  int proximal_sphere() const { return start_is_proximal ? start : end; }
  int distal_sphere() const { return start_is_proximal ? end : start; }
  /// 0 if sphere index `s` is the start sphere, 1 if it is the end sphere.
  int end_of(int s) const { return s == start ? 0 : 1; }
};

struct Tolerances {
  double scene_diagonal = 1.0;
  double eps_parallel = kEpsParallel;
  double eps_coplanar = 1e-7;
  double eps_tan = 1e-7;
  double eps_r = 1e-9;
  double eps_surf = 1e-7;

  static Tolerances for_diagonal(double diag);
};

struct Bend {
  int joint_sphere_id = 0;
  std::optional<int> bone_id;  // restrict to one child bone at the joint
  Vec3 axis{0, 0, 1};
  double angle = 0.0;
};

struct Pose {
  std::vector<Bend> bends;
  std::map<int, double> twists;               // bone id -> radians
  std::map<int, double> sphere_scales;        // sphere id -> radius scale
  std::map<int, double> bone_length_scales;   // bone id -> length scale

  bool is_identity() const;
};

/// Which part of a bone a surface point belongs to.
enum class BoneRegion { kCone, kStartCap, kEndCap };

struct BoneProjection {
  BoneRegion region = BoneRegion::kCone;
  Vec3 point;            // closest point on the bone surface
  Vec3 normal;           // outward surface normal there
  double signed_distance = 0.0;
  double azimuth = 0.0;  // around the bone axis
  double lambda = 0.0;   // position along the generatrix, [0,1] on the cone
  bool on_axis = false;
};

class Skeleton {
 public:
  Skeleton() = default;

  /// Validates the topology (tree, simple chains, non-nested bones) and derives
  /// all cone geometry. Throws Error(kInvalidSkeleton / kNestedSpheres).
  static Skeleton build(std::vector<SphereNode> spheres, std::vector<std::pair<int, int>> bone_ends,
                        std::vector<int> bone_ids, std::vector<std::vector<int>> chains);

  const std::vector<SphereNode>& spheres() const { return spheres_; }
  const std::vector<Bone>& bones() const { return bones_; }
  const std::vector<std::vector<int>>& chains() const { return chains_; }
  const std::vector<int>& junctions() const { return junctions_; }
  const std::vector<int>& bones_at(int sphere) const { return sphere_bones_[static_cast<std::size_t>(sphere)]; }
  const std::vector<int>& tree_order() const { return order_; }
  const Tolerances& tol() const { return tol_; }

  const SphereNode& sphere(int i) const { return spheres_[static_cast<std::size_t>(i)]; }
  const Bone& bone(int i) const { return bones_[static_cast<std::size_t>(i)]; }
  int bone_count() const { return static_cast<int>(bones_.size()); }
  int sphere_count() const { return static_cast<int>(spheres_.size()); }

  std::optional<int> sphere_index(int id) const;
  std::optional<int> bone_index(int id) const;
  bool is_junction(int sphere) const { return bones_at(sphere).size() >= 3; }

  /// Bones other than `bone` incident to `sphere`.
  std::vector<int> neighbors(int bone, int sphere) const;

  // Per-bone surface helpers.
  Vec3 azimuth_dir(int bone, double azimuth) const;
  Vec3 cone_normal(int bone, double azimuth) const;
  Vec3 tangency_point(int bone, int end_index, double azimuth) const;
  Vec3 generatrix_point(int bone, double azimuth, double lambda) const;
  double azimuth_of(int bone, const Vec3& p) const;
  /// Axial coordinate of the sphere center whose sphere is closest to `p`
  /// along the cone normal, unclamped (0 at start center, length at end).
  double axial_of(int bone, const Vec3& p) const;
  double radius_at(int bone, double rho) const;

  BoneProjection project(int bone, const Vec3& p) const;
  /// Signed distance from `p` to the bone solid (negative inside).
  double signed_distance(int bone, const Vec3& p) const;
  /// Signed distance to the union of all bones.
  double surface_distance(const Vec3& p) const;

  /// Stable 64-bit fingerprint of the rest geometry and topology.
  std::uint64_t fingerprint() const;

  friend Skeleton apply_pose(const Skeleton& sk, const Pose& pose);

 private:
  void derive();

  std::vector<SphereNode> spheres_;
  std::vector<Bone> bones_;
  std::vector<std::vector<int>> chains_;
  std::vector<int> junctions_;
  std::vector<std::vector<int>> sphere_bones_;
  std::vector<int> order_;
  std::map<int, int> sphere_ids_;
  std::map<int, int> bone_ids_;
  int root_sphere_ = 0;
  Tolerances tol_;
};

/// r(rho) = (1 - rho) r1 + rho r2. Throws Error(kOutOfRange) outside [0,1].
double radius_at(const Skeleton& sk, int bone, double rho);

struct Registration {
  std::vector<int> bone;  // bone index per point
};

/// Nearest-bone registration, used when no upstream registration is given.
Registration register_closest(const Skeleton& sk, const std::vector<Vec3>& points);

/// Places the skeleton in `pose`: anatomy scales first, then bends and twists
/// propagated root to leaf. Throws Error(kInvalidJointRef) on unknown ids.
Skeleton apply_pose(const Skeleton& sk, const Pose& pose);

struct SkeletonFile {
  Skeleton skeleton;
  std::optional<Registration> registration;
};

SkeletonFile parse_skeleton_json(std::string_view text);
std::string skeleton_to_json(const Skeleton& sk);
SkeletonFile load_skeleton(const std::string& path);

Pose parse_pose_json(std::string_view text);
std::string pose_to_json(const Pose& pose);
Pose load_pose(const std::string& path);

}  // namespace bskin
