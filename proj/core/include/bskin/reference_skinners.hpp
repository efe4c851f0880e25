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

// Linear blend and dual-quaternion skinning with Gaussian bone weights, for
// comparison with baseline skinning.

#pragma once

#include <array>
#include <vector>

#include "bskin/geom.hpp"
#include "bskin/sphere_mesh.hpp"

namespace bskin {

inline constexpr int kMaxInfluences = 4;

/// Up to four (bone index, weight) pairs summing to 1.
struct PointWeights {
  std::array<int, kMaxInfluences> bone{-1, -1, -1, -1};
  std::array<double, kMaxInfluences> weight{};
  int count = 0;
};

using WeightSet = std::vector<PointWeights>;

/// Weight of bone i proportional to exp(-d_i^2 / (2 sigma_i^2)), d_i the
/// distance from the point to bone i's surface (0 inside), sigma_i =
/// sigma_factor times the mean radius of bone i's spheres. Top four kept and
/// normalized. Throws Error(kOutOfRange) unless sigma_factor > 0.
WeightSet gaussian_weights(const Skeleton& sk, const std::vector<Vec3>& points, double sigma_factor = 1.0,
                           unsigned threads = 0);

/// p -> linear * p + translation.
struct BoneTransform {
  Mat3 linear;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }
  /// Whether `linear` is a rotation within `tol`.
  bool rigid(double tol = 1e-9) const;
};

/// Rest-to-posed transform of every bone: rotation including its own twist,
/// scaled along the rest axis by the bone length ratio.
std::vector<BoneTransform> bone_transforms(const Skeleton& rest, const Pose& pose);

/// p' = sum_i w_i M_i p.
std::vector<Vec3> lbs(const std::vector<Vec3>& points, const WeightSet& weights,
                      const std::vector<BoneTransform>& transforms, unsigned threads = 0);

/// Unit dual quaternion: real part (w, x, y, z) and dual part.
struct DualQuat {
  std::array<double, 4> real{1, 0, 0, 0};
  std::array<double, 4> dual{0, 0, 0, 0};

  static DualQuat from_transform(const BoneTransform& t);
  /// Rigid transform of a normalized dual quaternion.
  BoneTransform to_transform() const;
};

/// Blend of the weighted bone dual quaternions, signs aligned with the
/// largest-weight bone, normalized.
DualQuat blend_dual_quats(const PointWeights& w, const std::vector<DualQuat>& dqs);

/// Dual-quaternion skinning. Throws Error(kNonRigidTransform) when a bone
/// transform used by some point is not rigid.
std::vector<Vec3> dqs(const std::vector<Vec3>& points, const WeightSet& weights,
                      const std::vector<BoneTransform>& transforms, unsigned threads = 0);

}  // namespace bskin
