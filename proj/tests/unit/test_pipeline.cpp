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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "bskin/error.hpp"
#include "bskin/pipeline.hpp"
#include "clouds.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace bskin;

namespace {

constexpr double kDeg = kPi / 180.0;

Pose bend_pose(int sphere_id, double deg, Vec3 axis = {0, 0, 1}) {
  Pose p;
  Bend b;
  b.joint_sphere_id = sphere_id;
  b.axis = axis;
  b.angle = deg * kDeg;
  p.bends.push_back(b);
  return p;
}

double max_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, distance(a[i], b[i]));
  return worst;
}

bool bit_identical(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(Vec3)) == 0;
}

// Largest |distance to the posed surface - h| / h over the skinned points.
double offset_deviation(const Skeleton& posed, const std::vector<Vec3>& pts, double h) {
  double worst = 0.0;
  for (const Vec3& p : pts) worst = std::max(worst, std::abs(posed.surface_distance(p) - h) / h);
  return worst;
}

}  // namespace

TEST_CASE("skin options round trip through JSON") {
  SkinOptions o;
  o.profile_position = Profile::kLinear;
  o.modulation = false;
  o.fold_angle_threshold = 1.25;
  const SkinOptions back = parse_skin_options(skin_options_to_json(o));
  CHECK(back.profile_position == Profile::kLinear);
  CHECK(back.profile_direction == Profile::kCubic);
  CHECK_FALSE(back.modulation);
  CHECK(back.unfold_smoothing);
  CHECK(back.fold_angle_threshold == 1.25);
  CHECK(parse_skin_options("{}").profile_position == Profile::kCubic);
  CHECK_THROWS_AS(parse_skin_options(R"({"profile_position":"quintic"})"), Error);
  CHECK_THROWS_AS(parse_skin_options("[1,2]"), Error);
  CHECK_THROWS_AS(parse_skin_options("{"), Error);
}

TEST_CASE("height modulation scales by the sine ratio") {
  bool near = true;
  CHECK(modulate_height(1.0, 0.5, 0.25, &near) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_FALSE(near);
  CHECK(modulate_height(0.3, 1.0, 1.0) == 0.3);
  CHECK(modulate_height(2.0, 0.8, 1.0) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(modulate_height(1.0, 0.5, 0.0, &near) == doctest::Approx(0.5 / kEpsSin));
  CHECK(near);
}

TEST_CASE("identity pose reproduces the input cloud") {
  for (const Skeleton& sk : {scenes::three_bone_stripe(), scenes::tripod(), scenes::humanoid()}) {
    const clouds::Cloud c = clouds::around_bones(sk, 4000);
    const EncodedSet enc = encode(sk, c.registration, c.points);
    const SkinResult r = skin(sk, enc, Pose{});
    CHECK(max_distance(r.points, c.points) / sk.tol().scene_diagonal < 1e-9);
    CHECK(r.smoothed == 0);
  }
}

TEST_CASE("skinning is stateless across poses") {
  const Skeleton sk = scenes::humanoid();
  const clouds::Cloud c = clouds::around_bones(sk, 3000);
  const EncodedSet enc = encode(sk, c.registration, c.points);
  const SkinResult before = skin(sk, enc, Pose{});
  Pose p = bend_pose(2, 70.0, normalized(Vec3{0.2, 0.1, 1}));
  p.twists[5] = 0.8;
  const SkinResult posed = skin(sk, enc, p);
  CHECK(max_distance(posed.points, c.points) > 0.1);
  const SkinResult after = skin(sk, enc, Pose{});
  CHECK(bit_identical(before.points, after.points));
  CHECK(max_distance(after.points, c.points) / sk.tol().scene_diagonal < 1e-9);
}

TEST_CASE("encoding from another skeleton is rejected") {
  const Skeleton a = scenes::two_bone(0.0);
  const Skeleton b = scenes::two_bone(10.0);
  const clouds::Cloud c = clouds::around_bones(a, 50);
  const EncodedSet enc = encode(a, c.registration, c.points);
  try {
    skin(b, enc, Pose{});
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSkeletonMismatch);
  }
}

TEST_CASE("skinning is deterministic across thread counts") {
  const Skeleton sk = scenes::humanoid();
  const clouds::Cloud c = clouds::around_bones(sk, 3000);
  const EncodedSet enc = encode(sk, c.registration, c.points, 1);
  const EncodedSet enc4 = encode(sk, c.registration, c.points, 4);
  REQUIRE(enc.points.size() == enc4.points.size());
  CHECK(std::memcmp(enc.points.data(), enc4.points.data(), enc.points.size() * sizeof(EncodedPoint)) == 0);
  Pose p = bend_pose(6, 50.0);
  p.bends.push_back(bend_pose(9, -40.0, {1, 0, 0}).bends[0]);
  const SkinResult r1 = skin(sk, enc, p, {}, 1);
  const SkinResult r4 = skin(sk, enc, p, {}, 4);
  CHECK(bit_identical(r1.points, r4.points));
  CHECK(r1.issues.size() == r4.issues.size());
}

TEST_CASE("modulation keeps an offset cloud at its offset") {
  const Skeleton sk = scenes::two_bone(0.0);
  const double h = 0.1 * sk.sphere(1).radius;
  const clouds::Cloud c = clouds::offset_surface(sk, 3000, h);
  REQUIRE(c.points.size() == 3000);
  const EncodedSet enc = encode(sk, c.registration, c.points);
  const Pose pose = bend_pose(1, 60.0);
  const Deformer d(sk, pose, {});
  SkinOptions on;
  SkinOptions off;
  off.modulation = false;
  const double dev_on = offset_deviation(d.posed(), skin(sk, enc, pose, on).points, h);
  const double dev_off = offset_deviation(d.posed(), skin(sk, enc, pose, off).points, h);
  MESSAGE("offset deviation on ", dev_on, " off ", dev_off);
  CHECK(dev_on < 0.02);
  CHECK(dev_off > 0.05);
}

TEST_CASE("cap points keep their height") {
  const Skeleton sk = scenes::two_bone(0.0);
  const double h = 0.05;
  // Points on the free cap of the second bone, beyond its end sphere.
  std::vector<Vec3> pts;
  Registration reg;
  const SphereNode& tip = sk.sphere(2);
  for (int i = 0; i < 40; ++i) {
    const double a = kTwoPi * i / 40.0;
    const Vec3 dir = normalized(Vec3{1.0, 0.4 * std::cos(a), 0.4 * std::sin(a)});
    pts.push_back(tip.center + dir * (tip.radius + h));
    reg.bone.push_back(1);
  }
  const EncodedSet enc = encode(sk, reg, pts);
  const Pose pose = bend_pose(1, 75.0);
  const Deformer d(sk, pose, {});
  const SkinResult r = skin(sk, enc, pose);
  const SphereNode& posed_tip = d.posed().sphere(2);
  for (const Vec3& p : r.points) CHECK(std::abs(distance(p, posed_tip.center) - (tip.radius + h)) < 1e-9);
}

TEST_CASE("rigid neighborhoods take the full construction's result") {
  const Skeleton sk = scenes::humanoid();
  const clouds::Cloud c = clouds::around_bones(sk, 3000);
  const EncodedSet enc = encode(sk, c.registration, c.points);
  const Pose pose = bend_pose(2, 60.0, normalized(Vec3{0.3, 0.2, 1}));
  const Deformer d(sk, pose, {});
  const SkinResult r = skin(sk, enc, pose);
  std::size_t compared = 0;
  for (std::size_t i = 0; i < enc.points.size(); ++i) {
    const EncodedPoint& ep = enc.points[i];
    const int bone = *sk.bone_index(static_cast<int>(ep.bone_id));
    if (ep.rigid() || !d.rigid_neighborhood(bone)) continue;
    const DisplacedBase b = d.displace_base_point(ep);
    const Vec3 full = b.base + b.dir * modulate_height(ep.h, ep.sin_beta, b.sin_beta);
    CHECK(distance(full, r.points[i]) < 1e-9 * sk.tol().scene_diagonal);
    ++compared;
  }
  CHECK(compared > 1000);
}

TEST_CASE("output is continuous along a generatrix through a bent joint") {
  const Skeleton sk = scenes::two_bone(0.0);
  std::vector<Vec3> pts;
  Registration reg;
  const int n = 800;
  for (int i = 0; i < n; ++i) {
    const double x = 0.2 + 3.6 * i / (n - 1.0);
    pts.push_back({x, 0.0, 0.38});
    reg.bone.push_back(x < 2.0 ? 0 : 1);
  }
  const EncodedSet enc = encode(sk, reg, pts);
  for (double deg : {-70.0, 45.0, 90.0}) {
    const SkinResult r = skin(sk, enc, bend_pose(1, deg, {0, 1, 0}));
    double worst = 0.0;
    for (int i = 1; i < n; ++i) worst = std::max(worst, distance(r.points[i - 1], r.points[i]));
    CHECK(worst < 10.0 * 3.6 / (n - 1.0));
  }
}

TEST_CASE("smoothing keeps constant heights exactly and bounds steps") {
  std::vector<ZoneSample> constant;
  std::vector<ZoneSample> step;
  for (int i = 0; i < 200; ++i) {
    const Vec3 b{0.01 * i, 0.002 * (i % 7), 0.0};
    constant.push_back({b, 0.037, 0.05});
    step.push_back({b, i < 100 ? 0.01 : 0.09, 0.05});
  }
  for (double v : smooth_heights(constant)) CHECK(v == 0.037);
  const std::vector<double> s = smooth_heights(step);
  bool moved = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] >= 0.01);
    CHECK(s[i] <= 0.09);
    moved = moved || s[i] != step[i].h;
  }
  CHECK(moved);
  std::vector<ZoneSample> sharp = {{{0, 0, 0}, 1.0, 0.0}, {{0, 0, 0}, 2.0, 0.0}};
  const std::vector<double> k = smooth_heights(sharp);
  CHECK(k[0] == 1.0);
  CHECK(k[1] == 2.0);
}

TEST_CASE("an unfolded severe fold gets a smoothing zone") {
  const Skeleton folded = scenes::two_bone(150.0);
  const clouds::Cloud c = clouds::around_bones(folded, 4000);
  const EncodedSet enc = encode(folded, c.registration, c.points);

  const SkinResult unfold = skin(folded, enc, bend_pose(1, -150.0));
  CHECK(unfold.smoothed > 0);
  CHECK(skin(folded, enc, bend_pose(1, -100.0)).smoothed > 0);
  CHECK(skin(folded, enc, bend_pose(1, -20.0)).smoothed == 0);
  SkinOptions no_smooth;
  no_smooth.unfold_smoothing = false;
  CHECK(skin(folded, enc, bend_pose(1, -100.0), no_smooth).smoothed == 0);
  CHECK(skin(folded, enc, bend_pose(1, 10.0)).smoothed == 0);

  const Skeleton straight = scenes::two_bone(0.0);
  const clouds::Cloud s = clouds::around_bones(straight, 2000);
  const EncodedSet enc_s = encode(straight, s.registration, s.points);
  CHECK(skin(straight, enc_s, bend_pose(1, 60.0)).smoothed == 0);
}

TEST_CASE("zone geometry sits on the joint") {
  const Skeleton folded = scenes::two_bone(150.0);
  const Deformer d(folded, bend_pose(1, -150.0), {});
  int found = 0;
  for (int i = 0; i < 64; ++i) {
    const double az = kTwoPi * i / 64.0;
    for (int bone : {0, 1}) {
      const BaselinePortion rest = build_portion(folded, bone, az);
      const DeformedPortion dp = d.deform_portion(rest);
      for (int end : {0, 1}) {
        const auto z = compute_smoothing_zone(d, rest, dp, end, 2.0 * kPi / 3.0);
        if (!z) continue;
        ++found;
        CHECK(z->joint == 1);
        const SphereNode& j = d.posed().sphere(1);
        CHECK(std::abs(distance(z->s_prime, j.center) - j.radius) < 1e-9);
        CHECK(distance(z->s1, z->s2) > 1e-6);
        CHECK(z->delta_at(dp, dp.center_element, end == 0 ? 0.0 : 1.0).has_value());
      }
    }
  }
  CHECK(found > 0);
}
