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

#include "bskin/geom.hpp"

#include <algorithm>

namespace bskin {

Vec3 any_orthogonal(const Vec3& u) {
  const double ax = std::abs(u.x), ay = std::abs(u.y), az = std::abs(u.z);
  Vec3 canon{1, 0, 0};
  if (ay <= ax && ay <= az) {
    canon = {0, 1, 0};
  } else if (az <= ax && az <= ay) {
    canon = {0, 0, 1};
  }
  return normalized(canon - u * dot(canon, u));
}

double signed_angle(const Vec3& a, const Vec3& b, const Vec3& axis) {
  const Vec3 pa = a - axis * dot(a, axis);
  const Vec3 pb = b - axis * dot(b, axis);
  return std::atan2(dot(cross(pa, pb), axis), dot(pa, pb));
}

double wrap_pi(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

double wrap_two_pi(double a) {
  if (a >= 0.0 && a < kTwoPi) return a;
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

Mat3 Mat3::rotation(const Vec3& axis, double angle) {
  Mat3 r;
  if (angle == 0.0) return r;
  const Vec3 k = normalized(axis);
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  r.m = {t * k.x * k.x + c,       t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y,
         t * k.x * k.y + s * k.z, t * k.y * k.y + c,       t * k.y * k.z - s * k.x,
         t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c};
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) + (*this)(i, 2) * o(2, j);
    }
  }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  }
  return r;
}

Vec3 rotate_about_axis(const Vec3& p, const AxisRotation& r) {
  if (r.angle == 0.0) return p;
  const Vec3 k = r.axis_dir;
  const Vec3 v = p - r.axis_point;
  const double c = std::cos(r.angle), s = std::sin(r.angle);
  // Rodrigues.
  const Vec3 rv = v * c + cross(k, v) * s + k * (dot(k, v) * (1.0 - c));
  return r.axis_point + rv;
}

std::optional<PlaneSphereHit> plane_sphere_intersection(const Plane& pl, const Vec3& center,
                                                        double radius, double eps_tan) {
  const double d = pl.signed_distance(center);
  const double ad = std::abs(d);
  if (ad > radius + eps_tan) return std::nullopt;
  PlaneSphereHit hit;
  hit.circle.center = center - pl.unit_normal * d;
  hit.circle.normal = pl.unit_normal;
  if (std::abs(ad - radius) <= eps_tan) {
    hit.tangent = true;
    hit.circle.radius = 0.0;
    return hit;
  }
  hit.circle.radius = std::sqrt(std::max(0.0, radius * radius - d * d));
  return hit;
}

std::optional<Vec3> line_line_intersection_in_plane(const Line3& l1, const Line3& l2, const Plane& plane,
                                                    double eps_parallel) {
  const Vec3 d1 = normalized(l1.dir);
  const Vec3 d2 = normalized(l2.dir);
  const Vec3 c = cross(d1, d2);
  if (norm(c) < eps_parallel) return std::nullopt;
  // Solve l1.point + s d1 = l2.point + u d2 within the plane using the plane
  // normal to pick the well-conditioned 2x2 system.
  const Vec3 n = plane.unit_normal;
  const Vec3 w = l2.point - l1.point;
  const double denom = dot(cross(d1, d2), n);
  if (std::abs(denom) < eps_parallel) return std::nullopt;
  const double s = dot(cross(w, d2), n) / denom;
  return l1.point + d1 * s;
}

int line_sphere_intersection(const Line3& l, const Vec3& center, double radius, Vec3 out[2]) {
  const Vec3 d = normalized(l.dir);
  const Vec3 w = l.point - center;
  const double b = dot(w, d);
  const double c = dot(w, w) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  out[0] = l.point + d * (-b - sq);
  out[1] = l.point + d * (-b + sq);
  return sq == 0.0 ? 1 : 2;
}

std::optional<Line3> plane_plane_intersection(const Plane& a, const Plane& b) {
  const Vec3 dir = cross(a.unit_normal, b.unit_normal);
  const double n2 = norm2(dir);
  if (n2 < kEpsParallel * kEpsParallel) return std::nullopt;
  const double da = dot(a.unit_normal, a.point);
  const double db = dot(b.unit_normal, b.point);
  const Vec3 p = (cross(b.unit_normal, dir) * da + cross(dir, a.unit_normal) * db) / n2;
  return Line3{p, dir / std::sqrt(n2)};
}

int solve_trig(double a, double b, double c, double roots[2]) {
  const double r = std::hypot(a, b);
  if (r == 0.0) return 0;
  double q = c / r;
  constexpr double kSlack = 1e-9;
  if (q > 1.0 + kSlack || q < -1.0 - kSlack) return 0;
  q = std::clamp(q, -1.0, 1.0);
  const double base = std::atan2(b, a);
  const double delta = std::acos(q);
  if (delta == 0.0 || delta == kPi) {
    roots[0] = wrap_pi(base + delta);
    return 1;
  }
  roots[0] = wrap_pi(base - delta);
  roots[1] = wrap_pi(base + delta);
  return 2;
}

}  // namespace bskin
