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

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace bskin {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec3{};
}
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
constexpr Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }

/// Unit vector orthogonal to `u`, built from the canonical axis least aligned
/// with it. Deterministic for a given `u`.
Vec3 any_orthogonal(const Vec3& u);

/// Signed angle from `a` to `b` around `axis`; `a` and `b` are first projected
/// onto the plane orthogonal to `axis`.
double signed_angle(const Vec3& a, const Vec3& b, const Vec3& axis);

/// Wraps an angle to (-pi, pi].
double wrap_pi(double a);
/// Wraps an angle to [0, 2pi).
double wrap_two_pi(double a);

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  /// Rotation of `angle` radians about unit `axis` (right-hand rule).
  static Mat3 rotation(const Vec3& axis, double angle);

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  bool is_identity() const { return *this == Mat3{}; }
  friend bool operator==(const Mat3&, const Mat3&) = default;
};

struct Plane {
  Vec3 point;
  Vec3 unit_normal{0, 0, 1};

  /// Builds a plane from a point and a (not necessarily unit) normal.
  static Plane from_normal(const Vec3& point, const Vec3& normal) { return {point, normalized(normal)}; }

  double signed_distance(const Vec3& p) const { return dot(p - point, unit_normal); }
  Vec3 project(const Vec3& p) const { return p - unit_normal * signed_distance(p); }
};

struct Circle {
  Vec3 center;
  double radius = 0.0;
  Vec3 normal{0, 0, 1};

  /// Point at `angle` measured from `ref` (a unit vector in the circle plane).
  Vec3 at(const Vec3& ref, double angle) const {
    const Vec3 side = cross(normal, ref);
    return center + (ref * std::cos(angle) + side * std::sin(angle)) * radius;
  }
};

/// Circular arc traversed counter-clockwise about `plane_normal` from
/// `start_angle` to `end_angle` (start < end), angles measured from `ref`.
struct Arc3 {
  Vec3 center;
  double radius = 0.0;
  Vec3 plane_normal{0, 0, 1};
  Vec3 ref{1, 0, 0};
  double start_angle = 0.0;
  double end_angle = 0.0;

  double sweep() const { return end_angle - start_angle; }
  double length() const { return radius * sweep(); }
  Vec3 at_angle(double a) const {
    const Vec3 side = cross(plane_normal, ref);
    return center + (ref * std::cos(a) + side * std::sin(a)) * radius;
  }
  /// Point at normalized parameter s in [0,1] along the traversal.
  Vec3 at(double s) const { return at_angle(start_angle + s * sweep()); }
  /// Unit tangent in traversal direction at normalized parameter s.
  Vec3 tangent(double s) const {
    const double a = start_angle + s * sweep();
    const Vec3 side = cross(plane_normal, ref);
    return ref * -std::sin(a) + side * std::cos(a);
  }
};

struct AxisRotation {
  Vec3 axis_point;
  Vec3 axis_dir{0, 0, 1};
  double angle = 0.0;
};

Vec3 rotate_about_axis(const Vec3& p, const AxisRotation& r);

struct PlaneSphereHit {
  Circle circle;
  bool tangent = false;
};

/// Intersection circle of a plane and a sphere. Returns nullopt when they are
/// disjoint; a tangency (within `eps_tan`) yields a zero-radius circle with
/// `tangent` set.
std::optional<PlaneSphereHit> plane_sphere_intersection(const Plane& pl, const Vec3& center,
                                                        double radius, double eps_tan);

struct Line3 {
  Vec3 point;
  Vec3 dir;
};

inline constexpr double kEpsParallel = 1e-9;

/// Intersection of two coplanar lines. Returns nullopt when the lines are
/// parallel (normalized cross product below `eps_parallel`).
std::optional<Vec3> line_line_intersection_in_plane(const Line3& l1, const Line3& l2, const Plane& plane,
                                                    double eps_parallel = kEpsParallel);

/// Points of the line `l` lying on the sphere, ordered by line parameter.
int line_sphere_intersection(const Line3& l, const Vec3& center, double radius, Vec3 out[2]);

/// Line shared by two planes; nullopt when they are parallel.
std::optional<Line3> plane_plane_intersection(const Plane& a, const Plane& b);

/// Solves a*cos(x) + b*sin(x) = c. Returns the number of roots (0, 1 or 2)
/// written to `roots`, each in (-pi, pi]. Near-tangent cases are clamped to a
/// double root.
int solve_trig(double a, double b, double c, double roots[2]);

}  // namespace bskin
