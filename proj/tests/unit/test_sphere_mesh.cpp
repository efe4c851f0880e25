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

#include "bskin/error.hpp"
#include "bskin/sphere_mesh.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace bskin;

namespace {

double point_line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = normalized(b - a);
  const Vec3 v = p - a;
  return norm(v - d * dot(v, d));
}

// Independent check of a tangent cone: every generatrix line is at distance r_i
// from C_i, touching at the tangency point.
void check_generatrices(const SphereNode& s1, const SphereNode& s2) {
  const Skeleton sk = Skeleton::build({s1, s2}, {{s1.id, s2.id}}, {0}, {{0}});
  for (int i = 0; i < 1000; ++i) {
    const double az = kTwoPi * i / 1000.0;
    const Vec3 t0 = sk.tangency_point(0, 0, az);
    const Vec3 t1 = sk.tangency_point(0, 1, az);
    CHECK(std::abs(point_line_distance(s1.center, t0, t1) - s1.radius) < 1e-9);
    CHECK(std::abs(point_line_distance(s2.center, t0, t1) - s2.radius) < 1e-9);
    CHECK(std::abs(distance(t0, s1.center) - s1.radius) < 1e-9);
    CHECK(std::abs(distance(t1, s2.center) - s2.radius) < 1e-9);
  }
}

}  // namespace

TEST_CASE("derive_cone cylinder") {
  const ConeGeometry c = derive_cone({0, {0, 0, 0}, 2}, {1, {10, 0, 0}, 2});
  CHECK(c.is_cylinder());
  CHECK(c.sin_alpha == 0.0);
  CHECK(c.half_angle == 0.0);
}

TEST_CASE("derive_cone apex and half angle") {
  ConeGeometry c = derive_cone({0, {0, 0, 0}, 3}, {1, {4, 0, 0}, 1});
  CHECK(c.sin_alpha == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(c.apex);
  CHECK(distance(*c.apex, {6, 0, 0}) < 1e-12);
  check_generatrices({0, {0, 0, 0}, 3}, {1, {4, 0, 0}, 1});

  c = derive_cone({0, {0, 0, 0}, 1}, {1, {1, 0, 0}, 0.5});
  CHECK(c.sin_alpha == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(c.apex);
  CHECK(distance(*c.apex, {2, 0, 0}) < 1e-12);
  check_generatrices({0, {0, 0, 0}, 1}, {1, {1, 0, 0}, 0.5});
  check_generatrices({0, {1, -2, 0.5}, 0.4}, {1, {-1, 1, 2}, 0.9});
}

TEST_CASE("derive_cone rejects nested spheres") {
  CHECK_THROWS_AS(derive_cone({0, {0, 0, 0}, 3}, {1, {1, 0, 0}, 1}), Error);
}

TEST_CASE("radius_at") {
  const Skeleton sk = scenes::chain({{{0, 0, 0}, 2}, {{5, 0, 0}, 4}});
  CHECK(radius_at(sk, 0, 0.0) == 2.0);
  CHECK(radius_at(sk, 0, 1.0) == 4.0);
  CHECK(radius_at(sk, 0, 0.5) == 3.0);
  CHECK_THROWS_AS(radius_at(sk, 0, 1.5), Error);
}

TEST_CASE("apply_pose identity is exact") {
  const Skeleton sk = scenes::humanoid();
  const Skeleton posed = apply_pose(sk, Pose{});
  for (int i = 0; i < sk.sphere_count(); ++i) {
    CHECK(posed.sphere(i).center == sk.sphere(i).center);
    CHECK(posed.sphere(i).radius == sk.sphere(i).radius);
  }
}

TEST_CASE("apply_pose bend rotates the downstream sphere") {
  const Skeleton sk = scenes::two_bone(0.0);
  Pose pose;
  pose.bends.push_back({1, std::nullopt, {0, 0, 1}, kPi / 6});
  const Skeleton posed = apply_pose(sk, pose);
  const Vec3 expected = Vec3{2, 0, 0} + Vec3{std::cos(kPi / 6), std::sin(kPi / 6), 0} * 2.0;
  CHECK(distance(posed.sphere(2).center, expected) < 1e-12);
  CHECK(distance(posed.sphere(1).center, sk.sphere(1).center) == 0.0);
}

TEST_CASE("apply_pose radius scale recomputes the cone") {
  const Skeleton sk = scenes::chain({{{0, 0, 0}, 0.5}, {{2, 0, 0}, 0.4}, {{4, 0, 0}, 0.3}});
  Pose pose;
  pose.sphere_scales[1] = 1.1;
  const Skeleton posed = apply_pose(sk, pose);
  CHECK(posed.sphere(1).radius == doctest::Approx(0.44).epsilon(1e-14));
  // Hand computation: sin(alpha) = (r1 - r2) / l.
  CHECK(posed.bone(0).cone.sin_alpha == doctest::Approx((0.5 - 0.44) / 2.0).epsilon(1e-12));
  CHECK(posed.bone(1).cone.sin_alpha == doctest::Approx((0.44 - 0.3) / 2.0).epsilon(1e-12));
}

TEST_CASE("apply_pose rejects unknown joints") {
  const Skeleton sk = scenes::two_bone(0.0);
  Pose pose;
  pose.bends.push_back({42, std::nullopt, {0, 0, 1}, 0.3});
  CHECK_THROWS_AS(apply_pose(sk, pose), Error);
}

TEST_CASE("apply_pose keeps the cone law") {
  const Skeleton sk = scenes::humanoid();
  Pose pose;
  pose.bends.push_back({2, std::nullopt, {0, 0, 1}, 0.4});
  pose.bends.push_back({5, std::nullopt, {1, 0, 0}, 0.7});
  pose.twists[1] = 0.5;
  pose.bone_length_scales[5] = 1.2;
  const Skeleton posed = apply_pose(sk, pose);
  for (const Bone& b : posed.bones()) {
    const double r1 = posed.sphere(b.start).radius, r2 = posed.sphere(b.end).radius;
    const double l = distance(posed.sphere(b.start).center, posed.sphere(b.end).center);
    CHECK(std::abs(b.cone.sin_alpha - (r1 - r2) / l) < 1e-9);
  }
}

TEST_CASE("skeleton and pose JSON round trip") {
  const Skeleton sk = scenes::tripod();
  const SkeletonFile back = parse_skeleton_json(skeleton_to_json(sk));
  CHECK(back.skeleton.fingerprint() == sk.fingerprint());
  Pose pose;
  pose.bends.push_back({0, 1, {0, 0, 1}, 0.25});
  pose.twists[2] = -0.5;
  const Pose p2 = parse_pose_json(pose_to_json(pose));
  REQUIRE(p2.bends.size() == 1);
  CHECK(p2.bends[0].bone_id == 1);
  CHECK(p2.twists.at(2) == -0.5);
}
