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

#include <cmath>
#include <random>
#include <vector>

#include "bskin/error.hpp"
#include "bskin/reference_skinners.hpp"
#include "clouds.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace bskin;

namespace {

constexpr double kDeg = kPi / 180.0;

PointWeights single(int bone) {
  PointWeights w;
  w.bone[0] = bone;
  w.weight[0] = 1.0;
  w.count = 1;
  return w;
}

PointWeights half_half(int a, int b) {
  PointWeights w;
  w.bone = {a, b, -1, -1};
  w.weight = {0.5, 0.5, 0.0, 0.0};
  w.count = 2;
  return w;
}

Pose bend_pose(int sphere_id, double deg, Vec3 axis = {0, 0, 1}) {
  Pose p;
  Bend b;
  b.joint_sphere_id = sphere_id;
  b.axis = axis;
  b.angle = deg * kDeg;
  p.bends.push_back(b);
  return p;
}

double radial(const Vec3& p) { return std::hypot(p.y, p.z); }

}  // namespace

TEST_CASE("gaussian weights follow the nearest bones") {
  const Skeleton stripe = scenes::three_bone_stripe();
  const WeightSet far = gaussian_weights(stripe, {{0.2, 0.34, 0.0}});
  CHECK(far[0].bone[0] == 0);
  CHECK(far[0].weight[0] > 0.999);

  const Skeleton two = scenes::two_bone(0.0);
  const WeightSet mid = gaussian_weights(two, {{2.0, 0.5, 0.0}});
  REQUIRE(mid[0].count == 2);
  CHECK(mid[0].weight[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mid[0].weight[1] == doctest::Approx(0.5).epsilon(1e-12));

  const Skeleton hum = scenes::humanoid();
  const clouds::Cloud c = clouds::around_bones(hum, 10000, 0.5);
  const WeightSet ws = gaussian_weights(hum, c.points);
  for (const PointWeights& w : ws) {
    REQUIRE(w.count >= 1);
    REQUIRE(w.count <= kMaxInfluences);
    double sum = 0.0;
    for (int k = 0; k < w.count; ++k) {
      CHECK(w.weight[static_cast<std::size_t>(k)] >= 0.0);
      sum += w.weight[static_cast<std::size_t>(k)];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(gaussian_weights(hum, c.points, 0.0), Error);
}

TEST_CASE("identity transforms leave points unchanged") {
  const Skeleton sk = scenes::humanoid();
  const clouds::Cloud c = clouds::around_bones(sk, 2000);
  const WeightSet w = gaussian_weights(sk, c.points);
  const std::vector<BoneTransform> t = bone_transforms(sk, Pose{});
  const std::vector<Vec3> a = lbs(c.points, w, t);
  const std::vector<Vec3> b = dqs(c.points, w, t);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    CHECK(distance(a[i], c.points[i]) < 1e-12);
    CHECK(distance(b[i], c.points[i]) < 1e-12);
  }
}

TEST_CASE("a single full weight gives the bone's rigid motion") {
  const Skeleton sk = scenes::two_bone(0.0);
  Pose pose = bend_pose(1, 65.0, normalized(Vec3{0.2, 0.3, 1}));
  pose.twists[1] = 0.7;
  const std::vector<BoneTransform> t = bone_transforms(sk, pose);
  const Skeleton posed = apply_pose(sk, pose);
  // Bone 1 endpoints go to the posed sphere centers.
  CHECK(distance(t[1].apply(sk.sphere(1).center), posed.sphere(1).center) < 1e-12);
  CHECK(distance(t[1].apply(sk.sphere(2).center), posed.sphere(2).center) < 1e-12);
  CHECK(t[1].rigid());
  const std::vector<Vec3> pts = {{3.0, 0.31, 0.05}, {2.5, -0.2, 0.22}};
  const WeightSet w = {single(1), single(1)};
  const std::vector<Vec3> a = lbs(pts, w, t);
  const std::vector<Vec3> b = dqs(pts, w, t);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(distance(a[i], t[1].apply(pts[i])) < 1e-12);
    CHECK(distance(b[i], t[1].apply(pts[i])) < 1e-12);
  }
}

TEST_CASE("dual quaternions round trip rigid transforms") {
  BoneTransform t;
  t.linear = Mat3::rotation(normalized(Vec3{1, -2, 0.5}), 2.7);
  t.translation = {0.3, -1.2, 4.0};
  const BoneTransform back = DualQuat::from_transform(t).to_transform();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(std::abs(back.linear(r, c) - t.linear(r, c)) < 1e-12);
  }
  CHECK(distance(back.translation, t.translation) < 1e-12);
}

TEST_CASE("a half twist collapses linear blending but not dual quaternions") {
  const Skeleton sk = scenes::two_bone(0.0);
  Pose pose;
  pose.twists[1] = kPi;
  const std::vector<BoneTransform> t = bone_transforms(sk, pose);
  std::vector<Vec3> pts;
  for (int i = 0; i < 16; ++i) {
    const double a = kTwoPi * i / 16.0;
    pts.push_back({2.0, 0.3 * std::cos(a), 0.3 * std::sin(a)});
  }
  const WeightSet w(pts.size(), half_half(0, 1));
  const std::vector<Vec3> a = lbs(pts, w, t);
  const std::vector<Vec3> b = dqs(pts, w, t);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(radial(a[i]) < 0.5 * radial(pts[i]));
    CHECK(std::abs(radial(b[i]) - radial(pts[i])) < 1e-9);
  }
}

TEST_CASE("blended dual quaternions stay rigid") {
  const Skeleton sk = scenes::two_bone(0.0);
  const std::vector<BoneTransform> t = bone_transforms(sk, bend_pose(1, 90.0));
  std::vector<DualQuat> q;
  for (const BoneTransform& bt : t) q.push_back(DualQuat::from_transform(bt));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    PointWeights w = half_half(0, 1);
    w.weight[0] = unit(rng);
    w.weight[1] = 1.0 - w.weight[0];
    const BoneTransform b = blend_dual_quats(w, q).to_transform();
    CHECK(b.rigid(1e-9));
  }
  // Points at equal distance from the blend's fixed joint keep that distance.
  const BoneTransform half = blend_dual_quats(half_half(0, 1), q).to_transform();
  const Vec3 c = sk.sphere(1).center;
  CHECK(distance(half.apply(c), c) < 1e-12);
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = c + Vec3{std::cos(i * 0.7), std::sin(i * 0.7), 0.2 * i - 0.7};
    CHECK(std::abs(distance(half.apply(p), c) - distance(p, c)) < 1e-9);
  }
}

TEST_CASE("dual quaternion skinning rejects scaled bones") {
  const Skeleton sk = scenes::two_bone(0.0);
  Pose pose;
  pose.bone_length_scales[1] = 1.5;
  const std::vector<BoneTransform> t = bone_transforms(sk, pose);
  CHECK_FALSE(t[1].rigid());
  const std::vector<Vec3> pts = {{3.0, 0.3, 0.0}};
  try {
    dqs(pts, {single(1)}, t);
    FAIL("expected a non-rigid error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonRigidTransform);
  }
  // Linear blending accepts the stretch.
  CHECK(distance(lbs(pts, {single(1)}, t)[0], t[1].apply(pts[0])) < 1e-12);
}
