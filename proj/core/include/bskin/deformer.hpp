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

// Baseline deformation under a pose: segments become curves on the posed
// cones, rotated about their bone axis by an angle interpolated between the
// targets found at each end, then reconnected at the joints.

#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "bskin/baseline.hpp"
#include "bskin/encoder.hpp"
#include "bskin/geom.hpp"
#include "bskin/sphere_mesh.hpp"

namespace bskin {

enum class Profile { kLinear, kCubic };

/// tau(d) = -2 tau_max d^3 + 3 tau_max d^2. Throws Error(kOutOfRange) for d
/// outside [0,1].
double twist_profile(double d, double tau_max);

/// Interpolation weight in [0,1] of `profile` at d in [0,1].
double profile_weight(Profile profile, double d);

struct DeformConfig {
  Profile position = Profile::kCubic;   // base point displacement
  Profile direction = Profile::kCubic;  // detail direction evolution
};

struct BendTargets {
  Vec3 v_prime;
  Vec3 x_prime;
  double theta_v = 0.0;  // rotation of V about the axis of bone k
  double theta_x = 0.0;  // rotation of X about the axis of bone m
  Plane plane;           // intermediate sheaf plane
  Vec3 e_yx;
  Vec3 e_uv;
  Vec3 e_m;
  // Connection kinds of the two candidate planar baselines.
  JointKind kind_uv = JointKind::kFree;
  JointKind kind_yx = JointKind::kFree;
};

/// Targets for the generatrix of bone `k` at `azimuth_k` and the generatrix
/// of bone `m` at `azimuth_m`, both ending on sphere `joint` of the posed
/// skeleton. Throws Error(kSheafDegenerate) when the apexes coincide.
BendTargets resolve_bend_targets(const Skeleton& posed, int joint, int k, double azimuth_k, int m, double azimuth_m);

/// Generatrix of `bone` at `azimuth` rotated about the bone axis by an angle
/// interpolated from `angle0` (lambda = 0) to `angle1` (lambda = 1), kept on
/// the cone and traversed over [lambda_a, lambda_b].
class DeformedCurve {
 public:
  DeformedCurve() = default;
  DeformedCurve(const Skeleton& sk, int bone, double azimuth, double angle0, double angle1, Profile profile,
                double lambda_a, double lambda_b);

  int bone() const { return bone_; }
  double azimuth() const { return azimuth_; }
  double lambda_a() const { return lambda_a_; }
  double lambda_b() const { return lambda_b_; }
  void set_range(double lambda_a, double lambda_b);
  /// No rotation variation: the curve is a straight generatrix piece.
  bool constant() const { return angle0_ == angle1_; }

  double angle_at(double lambda) const;
  /// Rotation at `lambda` interpolated with another profile.
  double angle_with(double lambda, Profile profile) const;
  double azimuth_at(double lambda) const { return azimuth_ + angle_at(lambda); }
  Vec3 at_lambda(double lambda) const;
  /// d at_lambda / d lambda.
  Vec3 derivative(double lambda) const;

  double length() const;
  /// Generatrix parameter at arclength fraction u of the traversal.
  double lambda_at(double u) const;
  Vec3 at(double u) const { return at_lambda(lambda_at(u)); }
  Vec3 tangent(double u) const;
  std::vector<Vec3> polyline(int samples) const;

 private:
  void sample() const;
  /// |d at_lambda / d lambda|.
  double speed(double lambda) const;
  double arclength_between(double from, double to) const;

  int bone_ = -1;
  double azimuth_ = 0.0;
  double angle0_ = 0.0;
  double angle1_ = 0.0;
  Profile profile_ = Profile::kCubic;
  double lambda_a_ = 0.0;
  double lambda_b_ = 1.0;
  Vec3 c0_, c1_, axis_, ref_, side_;
  double r0_ = 0.0, r1_ = 0.0, cos_a_ = 1.0, sin_a_ = 0.0;
  double sample_spacing_ = 0.0;
  double speed2_rigid_ = 0.0;
  mutable std::vector<double> lambdas_;
  mutable std::vector<double> cumulative_;
};

/// Samples of a deformed segment, `samples` >= 2 points.
std::vector<Vec3> deform_segment(const Skeleton& posed, int bone, double azimuth, double lambda0, double lambda1,
                                 double angle0, double angle1, Profile profile, int samples = 64);

enum class DeformedKind { kCurve, kArc, kConnector };

struct DeformedElement {
  DeformedKind kind = DeformedKind::kCurve;
  DeformedCurve curve;
  Arc3 arc;
  int sphere = -1;
  Vec3 p0, p1;

  Vec3 start() const { return at(0.0); }
  Vec3 end() const { return at(1.0); }
  double length() const;
  Vec3 at(double u) const;
  Vec3 tangent(double u) const;
};

/// How the two deformed curves meeting at a joint were joined.
struct Reconnection {
  JointKind kind = JointKind::kArc;
  bool cropped_center = false;
  bool cropped_other = false;
  std::vector<DeformedElement> bridge;  // traversed from the center curve outward
  Vec3 anchor;
  int anchor_element = 0;  // index into `bridge`, -1 for the center curve end
  double anchor_u = 0.0;
};

/// Joins `center` (ending at its `center_end` side on `joint`) to `other`
/// (ending at its `other_end` side): arc on the joint sphere when the curves
/// stay apart, crops at the separator plane when they enter each other.
/// Curve ranges are updated in place.
Reconnection reconnect(const Skeleton& posed, int joint, DeformedCurve& center, int center_end, DeformedCurve& other,
                       int other_end);

struct DeformedPortion {
  int bone = -1;
  std::vector<DeformedElement> elements;
  std::vector<AnchorPoint> anchors;
  std::vector<std::pair<int, double>> boundaries;  // (element, u): start, anchors, end
  int center_element = -1;
  BendTargets targets[2];
  bool bent[2] = {false, false};

  int section_count() const { return static_cast<int>(boundaries.size()) - 1; }
  double section_length(int section) const;
  /// Element and parameter at curvilinear ratio `t` of `section`.
  std::pair<int, double> locate(int section, double t) const;
  Vec3 point_at(int section, double t) const;
  std::vector<Vec3> polyline(double spacing) const;
};

struct DisplacedBase {
  Vec3 base;
  Vec3 dir;
  double sin_beta = 1.0;
  bool near_tangent = false;
  bool section_collapsed = false;
};

/// Posed skeleton plus per-pose caches shared by all points of a job.
class Deformer {
 public:
  Deformer(const Skeleton& rest, const Pose& pose, DeformConfig config = {});

  const Skeleton& rest() const { return *rest_; }
  const Skeleton& posed() const { return posed_; }
  const DeformConfig& config() const { return config_; }
  bool identity() const { return identity_; }
  /// Whether the geometry around sphere `s` changed beyond a rigid motion.
  bool joint_modified(int s) const { return modified_[static_cast<std::size_t>(s)] != 0; }

  DeformedPortion deform_portion(const BaselinePortion& portion) const;
  /// Detail direction at parameter `u` of `element`, from a baseline built on
  /// the posed skeleton through that point.
  DirectionSample direction_at(const DeformedPortion& dp, int element, double u) const;
  DisplacedBase displace_base_point(const EncodedPoint& ep) const;
  /// Posed location of a point stored in bone-local coordinates.
  Vec3 rigid_point(const EncodedPoint& ep) const;

  /// Whether the bone, its joints and every bone at them move as one rigid
  /// body, so that its portions deform by the bone transform alone.
  bool rigid_neighborhood(int bone) const { return rigid_[static_cast<std::size_t>(bone)] != 0; }
  /// Rest point carried by the rigid transform of `bone`.
  Vec3 carry(int bone, const Vec3& p) const;

 private:
  double own_twist_at(int bone, int sphere) const;
  const PivotArc* pivot(bool posed, int joint, int a, int b) const;
  BendTargets junction_targets(const JointConnection& rest_conn, int k, double azimuth_k, double azimuth_m) const;

  const Skeleton* rest_;
  Skeleton posed_;
  DeformConfig config_;
  bool identity_ = false;
  std::vector<char> modified_;
  std::vector<char> rigid_;
  std::map<std::tuple<int, int, int>, PivotArc> rest_pivots_;
  std::map<std::tuple<int, int, int>, PivotArc> posed_pivots_;
};

/// Convenience wrapper building a one-off Deformer.
DeformedPortion deform_portion(const Skeleton& rest, const Pose& pose, const BaselinePortion& portion,
                               DeformConfig config = {});

}  // namespace bskin
