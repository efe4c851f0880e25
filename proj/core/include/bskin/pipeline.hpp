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

// End-to-end skinning: encode once, then per pose deform each point's
// baseline portion, move its base point by curvilinear ratio, modulate its
// height and smooth heights over unfolded joints.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bskin/deformer.hpp"
#include "bskin/encoder.hpp"
#include "bskin/sphere_mesh.hpp"

namespace bskin {

struct SkinOptions {
  Profile profile_position = Profile::kCubic;
  Profile profile_direction = Profile::kCubic;
  bool modulation = true;
  bool unfold_smoothing = true;
  /// Interior joint angle (radians) below which a rest fold counts as severe.
  double fold_angle_threshold = 2.0 * kPi / 3.0;
};

/// {"version":1,"profile_position":"cubic","profile_direction":"cubic",
/// "modulation":true,"unfold_smoothing":true,"fold_angle_threshold":2.094...}.
/// Missing keys keep their defaults. Throws Error(kParseError).
SkinOptions parse_skin_options(std::string_view json_text);
std::string skin_options_to_json(const SkinOptions& options);

/// Encoded cloud tied to the skeleton it was encoded against.
struct EncodedSet {
  std::uint64_t skeleton_fingerprint = 0;
  std::vector<EncodedPoint> points;
  std::vector<PointIssue> issues;
};

EncodedSet encode(const Skeleton& sk, const Registration& registration, const std::vector<Vec3>& points,
                  unsigned threads = 0);

/// h' = h sin(beta) / sin(beta'), with sin(beta') floored at kEpsSin.
/// `near_tangent` is set when the floor applies.
double modulate_height(double h, double sin_beta, double sin_beta_prime, bool* near_tangent = nullptr);

/// Region of an unfolded joint lacking detail: from S1 on the center bone's
/// curve through the new arc to S2 on the other bone's curve.
struct SmoothingZone {
  int joint = -1;
  int center_bone = -1;
  int other_bone = -1;
  int end = 0;               // end of the portion facing the joint
  Vec3 s1, s2, s_prime;
  double lambda_center = 0.0;
  double lambda_other = 0.0;

  /// Gaussian width at parameter `u` of element `element` of `dp`, or nullopt
  /// outside the zone.
  std::optional<double> delta_at(const DeformedPortion& dp, int element, double u) const;
};

/// Zone of `end` of a portion, present when the rest joint was a fold whose
/// concave segments met at an interior angle below the threshold and the
/// pose opens it to at least the threshold.
std::optional<SmoothingZone> compute_smoothing_zone(const Deformer& deformer, const BaselinePortion& rest,
                                                    const DeformedPortion& dp, int end, double fold_angle_threshold);

struct ZoneSample {
  Vec3 base;
  double h = 0.0;
  double delta = 0.0;
};

/// Gaussian average of the heights within 3 delta of each sample, using that
/// sample's delta. Zero delta keeps the height.
std::vector<double> smooth_heights(const std::vector<ZoneSample>& samples);

struct SkinningJob {
  const Skeleton* skeleton = nullptr;
  const EncodedSet* encoded = nullptr;
  Pose pose;
  SkinOptions options;
  unsigned threads = 0;
};

struct SkinResult {
  std::vector<Vec3> points;
  std::vector<PointIssue> issues;
  std::size_t smoothed = 0;
};

/// Throws Error(kSkeletonMismatch) when the encoding belongs to another
/// skeleton.
SkinResult skin(const SkinningJob& job);
SkinResult skin(const Skeleton& sk, const EncodedSet& encoded, const Pose& pose, const SkinOptions& options = {},
                unsigned threads = 0);

/// `count` baseline portions spread round-robin over the bones, with evenly
/// spaced azimuths per bone.
std::vector<BaselinePortion> sample_portions(const Skeleton& sk, int count);

/// Polylines of the sampled portions deformed by `pose`, in the same JSON
/// layout as baselines_to_json. `spacing` 0 means 1% of the scene diagonal.
std::string posed_baselines_to_json(const Skeleton& rest, const Pose& pose, int count, double spacing = 0.0);

}  // namespace bskin
