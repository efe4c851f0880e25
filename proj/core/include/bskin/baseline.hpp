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

// Baselines: curves on the sphere-mesh surface made of cone generatrix
// segments and spherical arcs. A portion is built per point over the point's
// bone and its two neighbors, keyed by the azimuth of its segment on the
// central bone.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bskin/geom.hpp"
#include "bskin/sphere_mesh.hpp"

namespace bskin {

enum class ElementKind { kSegment, kArc };

struct BaselineElement {
  ElementKind kind = ElementKind::kSegment;

  // Segment: part [lambda0, lambda1] of the generatrix of `bone` at `azimuth`
  // (lambda measured from the start tangency to the end tangency of the bone;
  // traversal goes from lambda0 to lambda1, which may be decreasing).
  int bone = -1;
  double azimuth = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 1.0;
  Vec3 p0, p1;

  // Arc on sphere `sphere`.
  Arc3 arc;
  int sphere = -1;

  Vec3 start() const { return kind == ElementKind::kSegment ? p0 : arc.at(0.0); }
  Vec3 end() const { return kind == ElementKind::kSegment ? p1 : arc.at(1.0); }
  double length() const { return kind == ElementKind::kSegment ? distance(p0, p1) : arc.length(); }
  /// Point at normalized parameter s in [0,1] along the traversal.
  Vec3 at(double s) const { return kind == ElementKind::kSegment ? lerp(p0, p1, s) : arc.at(s); }
  Vec3 tangent(double s) const;
};

enum class JointKind { kFree, kArc, kCorner };

enum class AnchorKind { kOnArc, kSegmentIntersection };

struct AnchorPoint {
  Vec3 position;
  int sphere = -1;
  AnchorKind kind = AnchorKind::kOnArc;
};

struct SeparatorPlane {
  Plane plane;  // positive side faces bone_a
  int sphere = -1;
  int bone_a = -1;
  int bone_b = -1;
};

/// Same arc traversed backwards.
Arc3 reversed_arc(const Arc3& a);

/// Arc from `from` sweeping `sweep` radians (>= 0) about `normal`.
Arc3 make_arc(const Vec3& center, double radius, const Vec3& normal, const Vec3& from, double sweep);

/// Parameter in [0,1] where `arc` crosses `plane`; the endpoint closest to the
/// plane when it does not.
double arc_plane_crossing(const Arc3& arc, const Plane& plane);

/// Plane holding the intersection of the tangent cones of two bones sharing
/// sphere `joint`; oriented so that bone `a` is on the positive side.
SeparatorPlane separator_plane(const Skeleton& sk, int a, int b, int joint);

/// "Depth" of `p` into the cone of `bone` past its tangency circle on `joint`
/// (tangent length to the joint sphere for points on the cone). Larger means
/// deeper into the bone.
double cone_depth(const Skeleton& sk, int bone, int joint, const Vec3& p);

/// Plane of the sheaf through the apexes of bones `a` and `b` containing `q`.
/// Cylinders contribute their axis direction; when the apex line degenerates
/// (coaxial cylinders) the plane through the common axis and `q` is used.
Plane sheaf_plane(const Skeleton& sk, int a, int b, int joint, const Vec3& q);

/// Azimuths on `bone` of the tangency points at sphere `end_index` that lie in
/// `plane`. Returns the count (0..2).
int azimuths_in_plane(const Skeleton& sk, int bone, int end_index, const Plane& plane, double out[2]);

/// How a baseline crosses the joint between the center bone and `other`.
struct JointConnection {
  JointKind kind = JointKind::kFree;
  int sphere = -1;
  int other_bone = -1;
  int other_end = 0;          // end index of `other_bone` at the joint
  double other_azimuth = 0.0;
  Plane support;
  Vec3 v;                     // center bone tangency on the joint sphere
  Vec3 x;                     // other bone tangency on the joint sphere
  Vec3 anchor;
  Arc3 arc;                   // traversed from v to x (kArc) or the free closure
  bool tangent_plane = false;
  // Free end: pole of the cap.
  Vec3 pole;
};

/// Connects the generatrix of `bone` at `azimuth` through sphere
/// `bone.sphere_at(end_index)` to neighbor `other`, in the plane holding the
/// generatrix and the apex of `other`.
JointConnection connect_at_joint(const Skeleton& sk, int bone, double azimuth, int end_index, int other);

/// Free extremity closure: arc from the segment end to the cap pole.
JointConnection free_closure(const Skeleton& sk, int bone, double azimuth, int end_index);

/// Chooses the partner bone across a joint for the generatrix of `bone` at
/// `azimuth`. With one neighbor it is that neighbor; at a junction the
/// partner whose pivot-arc cell contains the crossing (ties: lowest bone id).
/// Returns -1 for a free extremity.
int partner_across(const Skeleton& sk, int bone, double azimuth, int end_index);

/// Point where the baseline of `conn` crosses the pivot circle of the pair:
/// the intersection of the support plane and the pivot circle nearest the
/// anchor.
Vec3 pivot_crossing(const Skeleton& sk, int bone, const JointConnection& conn);

/// Pivot circle of a pair at a joint together with the arc of it lying in the
/// pair's junction cell.
struct PivotArc {
  Circle circle;
  Vec3 ref;             // angle origin in the circle plane
  double start = 0.0;   // cell arc, ccw about circle.normal from ref
  double end = kTwoPi;
  bool full = true;     // no third cone cuts the circle
  int bone_a = -1;      // canonical pair order (a < b)
  int bone_b = -1;
  int sphere = -1;
};

PivotArc pivot_arc(const Skeleton& sk, int joint, int bone_a, int bone_b);

/// Normalized angular coordinate c in [0,1] of `point` along the pair's cell
/// arc. Throws Error(kWrongCell) if the point is outside the cell.
double junction_pivot_coordinate(const Skeleton& sk, int joint, int bone_a, int bone_b, const Vec3& point);
double junction_pivot_coordinate(const PivotArc& arc, const Vec3& point, double tol);
Vec3 point_at_pivot_coordinate(const PivotArc& arc, double c);

struct BaselinePortion {
  int bone = -1;
  double azimuth = 0.0;
  std::vector<BaselineElement> elements;
  std::vector<AnchorPoint> anchors;
  std::vector<double> support_plane_keys;  // azimuth of each segment about its bone
  JointConnection ends[2];                 // at the start / end sphere of `bone`
  int center_element = -1;
  /// Arclength of each section boundary: portion start, anchors, portion end.
  std::vector<double> breaks;
  std::vector<double> element_offsets;     // cumulative arclength at element starts

  double total_length() const { return breaks.empty() ? 0.0 : breaks.back(); }
  int section_count() const { return static_cast<int>(breaks.size()) - 1; }
  /// Element index and normalized element parameter at arclength `s`.
  std::pair<int, double> locate(double s) const;
  Vec3 point_at(double s) const;
  /// Arclength of the point at normalized parameter `u` of element `e`.
  double arclength_of(int element, double u) const;
  /// Section index and curvilinear ratio of arclength `s`.
  std::pair<int, double> section_of(double s) const;
  double arclength_from_section(int section, double t) const;
  /// Dense polyline with roughly `spacing` between samples.
  std::vector<Vec3> polyline(double spacing) const;
};

/// Builds the portion of the baseline whose segment on `bone` is the
/// generatrix at `azimuth`. Throws Error(kDegenerateBone) for invalid input.
BaselinePortion build_portion(const Skeleton& sk, int bone, double azimuth);

/// The ends of build_portion and its center segment as the only element.
BaselinePortion build_center(const Skeleton& sk, int bone, double azimuth);

/// Portion containing the surface point `p_tilde` of `bone` (on its cone or
/// on one of its caps). Returns nullopt when the point lies in a hidden part
/// of a joint sphere.
std::optional<BaselinePortion> select_branch(const Skeleton& sk, int bone, const Vec3& p_tilde);

/// Sampled baseline polylines as JSON: {"version":1,"baselines":[{bone,
/// azimuth, points:[[x,y,z],...]}]}.
std::string baselines_to_json(const Skeleton& sk, const std::vector<BaselinePortion>& portions, double spacing);

}  // namespace bskin
