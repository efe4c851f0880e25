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

#include "bskin/baseline.hpp"
#include "bskin/error.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace bskin;

namespace {

double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

// Structural invariants shared by every built portion.
void check_portion(const Skeleton& sk, const BaselinePortion& p) {
  const double eps = sk.tol().eps_surf;
  for (std::size_t i = 0; i < p.elements.size(); ++i) {
    const BaselineElement& el = p.elements[i];
    for (double s : {0.0, 0.5, 1.0}) {
      const Vec3 q = el.at(s);
      if (el.kind == ElementKind::kSegment) {
        CHECK(std::abs(sk.project(el.bone, q).signed_distance) < eps);
      } else {
        CHECK(std::abs(distance(q, sk.sphere(el.sphere).center) - sk.sphere(el.sphere).radius) < eps);
      }
    }
    if (i + 1 < p.elements.size()) {
      const BaselineElement& nx = p.elements[i + 1];
      CHECK(distance(el.end(), nx.start()) < eps);
      const bool mixed = el.kind != nx.kind;
      if (mixed && el.length() > eps && nx.length() > eps) {
        CHECK(angle_between(el.tangent(1.0), nx.tangent(0.0)) < 1e-6);
      }
    }
  }
  for (std::size_t a = 0; a < p.anchors.size(); ++a) {
    const JointConnection& c = p.ends[p.ends[0].kind == JointKind::kFree ? 1 : (a == 0 ? 0 : 1)];
    const SeparatorPlane sep = separator_plane(sk, p.bone, c.other_bone, c.sphere);
    CHECK(std::abs(sep.plane.signed_distance(p.anchors[a].position)) < eps);
  }
  // Coplanarity of each joint's two segments with both apexes.
  for (const JointConnection& c : p.ends) {
    if (c.kind == JointKind::kFree || c.tangent_plane) continue;
    const Plane& pl = c.support;
    for (int b : {p.bone, c.other_bone}) {
      const HomPoint& h = sk.bone(b).cone.apex_h;
      if (h.at_infinity()) {
        CHECK(std::abs(dot(h.xyz, pl.unit_normal)) < 1e-9);
      } else {
        CHECK(std::abs(pl.signed_distance(h.point())) < sk.tol().eps_coplanar * std::max(1.0, norm(h.point())));
      }
    }
    CHECK(std::abs(pl.signed_distance(c.x)) < sk.tol().eps_coplanar);
  }
  CHECK(p.breaks.front() == 0.0);
  for (std::size_t i = 0; i + 1 < p.breaks.size(); ++i) CHECK(p.breaks[i] <= p.breaks[i + 1]);
}

}  // namespace

TEST_CASE("straight cylinders give collinear segments without an arc") {
  const Skeleton sk = scenes::two_bone(0.0);
  const BaselinePortion p = build_portion(sk, 0, 0.0);
  for (const BaselineElement& el : p.elements) {
    if (el.kind == ElementKind::kArc) CHECK(el.sphere != 1);
  }
  REQUIRE(p.anchors.size() == 1);
  CHECK(p.ends[1].kind == JointKind::kCorner);
  const SeparatorPlane sep = separator_plane(sk, 0, 1, 1);
  CHECK(std::abs(sep.plane.signed_distance(p.anchors[0].position)) < sk.tol().eps_surf);
  const Vec3 d0 = p.elements[static_cast<std::size_t>(p.center_element)].tangent(0);
  const Vec3 d1 = p.elements.back().tangent(0);
  CHECK(angle_between(d0, d1) < 1e-12);
  check_portion(sk, p);
}

TEST_CASE("convex side of a right-angle joint has a C1 arc") {
  const Skeleton sk = scenes::two_bone(90.0);
  // frame_ref of bone 0 is +y; azimuth pi faces away from the bend.
  const BaselinePortion p = build_portion(sk, 0, kPi);
  CHECK(p.ends[1].kind == JointKind::kArc);
  const auto& e = p.elements;
  const int c = p.center_element;
  REQUIRE(static_cast<std::size_t>(c + 2) < e.size());
  CHECK(e[static_cast<std::size_t>(c)].kind == ElementKind::kSegment);
  CHECK(e[static_cast<std::size_t>(c + 1)].kind == ElementKind::kArc);
  CHECK(e[static_cast<std::size_t>(c + 2)].kind == ElementKind::kSegment);
  CHECK(angle_between(e[static_cast<std::size_t>(c)].tangent(1), e[static_cast<std::size_t>(c + 1)].tangent(0)) < 1e-6);
  CHECK(angle_between(e[static_cast<std::size_t>(c + 1)].tangent(1), e[static_cast<std::size_t>(c + 2)].tangent(0)) < 1e-6);
  // The anchor is not the arc midpoint for unequal cones.
  check_portion(sk, p);
}

TEST_CASE("concave side of a right-angle joint meets at a corner") {
  const Skeleton sk = scenes::two_bone(90.0);
  const BaselinePortion p = build_portion(sk, 0, 0.0);
  CHECK(p.ends[1].kind == JointKind::kCorner);
  check_portion(sk, p);
}

TEST_CASE("free extremity closes on the axis pole") {
  const Skeleton sk = scenes::two_bone(30.0, 0.4, 0.3, 0.2);
  const BaselinePortion p = build_portion(sk, 0, 0.0);
  const SphereNode& s0 = sk.sphere(0);
  const Vec3 pole = s0.center - sk.bone(0).cone.axis_dir * s0.radius;
  CHECK(p.elements.front().kind == ElementKind::kArc);
  CHECK(distance(p.elements.front().start(), pole) < 1e-12);
  const BaselinePortion q = build_portion(sk, 1, 1.0);
  const SphereNode& s2 = sk.sphere(2);
  CHECK(distance(q.elements.back().end(), s2.center + sk.bone(1).cone.axis_dir * s2.radius) < 1e-12);
}

TEST_CASE("portion invariants over azimuths and scenes") {
  const Skeleton scenes_list[] = {scenes::two_bone(0.0), scenes::two_bone(45.0, 0.4, 0.3, 0.2),
                                  scenes::two_bone(120.0, 0.2, 0.35, 0.25), scenes::three_bone_stripe(),
                                  scenes::tripod(), scenes::humanoid()};
  for (const Skeleton& sk : scenes_list) {
    for (int b = 0; b < sk.bone_count(); ++b) {
      for (int i = 0; i < 48; ++i) check_portion(sk, build_portion(sk, b, kTwoPi * (i + 0.37) / 48.0));
    }
  }
}

TEST_CASE("select_branch returns the component holding the point") {
  const Skeleton sk = scenes::two_bone(90.0, 0.3, 0.35, 0.25);
  const SphereNode& j = sk.sphere(1);
  // Convex cap point: away from both bones.
  const Vec3 convex = j.center + normalized(Vec3{1, -1, 0.3}) * j.radius;
  auto p = select_branch(sk, 0, convex);
  REQUIRE(p);
  bool found = false;
  for (const BaselineElement& el : p->elements) {
    if (el.kind != ElementKind::kArc) continue;
    for (int i = 0; i <= 2000 && !found; ++i) found = distance(el.at(i / 2000.0), convex) < 1e-3;
  }
  CHECK(found);
  // Cone point on the concave side: the returned branch passes through it.
  const Vec3 concave = sk.generatrix_point(0, 0.2, 0.8);
  p = select_branch(sk, 0, concave);
  REQUIRE(p);
  CHECK(p->ends[1].kind == JointKind::kCorner);
  const BaselineElement& c = p->elements[static_cast<std::size_t>(p->center_element)];
  CHECK(norm(cross(c.p1 - c.p0, concave - c.p0)) / norm(c.p1 - c.p0) < sk.tol().eps_surf);
}

TEST_CASE("select_branch on parallel cylinders uses the plane parallel to both axes") {
  const Skeleton sk = scenes::two_bone(0.0);
  const Vec3 q = Vec3{2, 0, 0} + normalized(Vec3{0, 1, 1}) * 0.3;
  auto p = select_branch(sk, 0, q);
  REQUIRE(p);
  CHECK(std::abs(dot(p->ends[1].support.unit_normal, Vec3{1, 0, 0})) < 1e-12);
  CHECK(std::abs(p->ends[1].support.signed_distance(q)) < 1e-12);
}

TEST_CASE("junction pivot coordinate is the angular fraction along the cell arc") {
  const Skeleton sk = scenes::tripod();
  const PivotArc arc = pivot_arc(sk, 0, 0, 1);
  CHECK_FALSE(arc.full);
  const double span = arc.end - arc.start;
  const Vec3 s = arc.circle.at(arc.ref, arc.start);
  const Vec3 e = arc.circle.at(arc.ref, arc.end);
  const Vec3 m = arc.circle.at(arc.ref, arc.start + 0.5 * span);
  CHECK(junction_pivot_coordinate(sk, 0, 0, 1, s) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(junction_pivot_coordinate(sk, 0, 0, 1, e) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(junction_pivot_coordinate(sk, 0, 0, 1, m) == doctest::Approx(0.5).epsilon(1e-12));
  const Vec3 outside = arc.circle.at(arc.ref, arc.start - 0.5 * (kTwoPi - span));
  CHECK_THROWS_AS(junction_pivot_coordinate(sk, 0, 0, 1, outside), Error);
  CHECK(distance(point_at_pivot_coordinate(arc, 0.5), m) < 1e-12);
}

TEST_CASE("junction cells cover the sphere portion") {
  const Skeleton sk = scenes::tripod();
  // Oracle: each cell boundary point has equal depth into its pair.
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
    const PivotArc arc = pivot_arc(sk, 0, a, b);
    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Vec3 q = point_at_pivot_coordinate(arc, c);
      CHECK(std::abs(cone_depth(sk, a, 0, q) - cone_depth(sk, b, 0, q)) < 1e-9);
    }
  }
}

TEST_CASE("tangent-plane anchors stay on their generatrix") {
  // This azimuth gives a support plane tangent to the chest sphere.
  const Skeleton sk = scenes::humanoid();
  const double az = 2.7695310904837309;
  const BaselinePortion p = build_portion(sk, 1, az);
  REQUIRE(p.ends[1].tangent_plane);
  const Vec3 g0 = sk.generatrix_point(1, az, 0.0);
  const Vec3 g = normalized(sk.generatrix_point(1, az, 1.0) - g0);
  const Vec3 v = p.ends[1].anchor - g0;
  CHECK(norm(v - g * dot(v, g)) < 1e-12);
  const SeparatorPlane sep = separator_plane(sk, 1, p.ends[1].other_bone, p.ends[1].sphere);
  CHECK(std::abs(sep.plane.signed_distance(p.ends[1].anchor)) < 1e-12);
}
