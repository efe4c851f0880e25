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

#include <algorithm>
#include <limits>
#include <optional>

#include "bskin/error.hpp"
#include "json.hpp"

namespace bskin {
namespace {

// Unit direction from sphere `joint` into `bone`.
Vec3 into_bone(const Skeleton& sk, int bone, int joint) {
  const Bone& b = sk.bone(bone);
  return joint == b.start ? b.cone.axis_dir : -b.cone.axis_dir;
}

Vec3 generatrix_dir(const Skeleton& sk, int bone, double azimuth) {
  const Bone& b = sk.bone(bone);
  const SphereNode& s0 = sk.sphere(b.start);
  const SphereNode& s1 = sk.sphere(b.end);
  return (s1.center - s0.center) + sk.cone_normal(bone, azimuth) * (s1.radius - s0.radius);
}

double generatrix_lambda(const Skeleton& sk, int bone, double azimuth, const Vec3& p) {
  const Bone& b = sk.bone(bone);
  const SphereNode& s0 = sk.sphere(b.start);
  const SphereNode& s1 = sk.sphere(b.end);
  const Vec3 n = sk.cone_normal(bone, azimuth);
  const Vec3 t0 = s0.center + n * s0.radius;
  const Vec3 g = (s1.center - s0.center) + n * (s1.radius - s0.radius);
  const double g2 = norm2(g);
  return g2 > 0.0 ? dot(p - t0, g) / g2 : 0.0;
}

// Orthonormal frame of a plane, angles measured about `n` from `e1`.
struct PlaneFrame {
  Vec3 c, e1, e2, n;
  double angle(const Vec3& p) const {
    const Vec3 v = p - c;
    return std::atan2(dot(v, e2), dot(v, e1));
  }
  double angle_of_dir(const Vec3& d) const { return std::atan2(dot(d, e2), dot(d, e1)); }
};

std::vector<int> sorted_by_id(const Skeleton& sk, std::vector<int> bones) {
  std::sort(bones.begin(), bones.end(), [&](int a, int b) { return sk.bone(a).id < sk.bone(b).id; });
  return bones;
}

// L_pair(p) - max over third bones of their depth; >= 0 inside the pair cell.
double cell_margin(const Skeleton& sk, int joint, int a, int b, const Vec3& p) {
  const double la = 0.5 * (cone_depth(sk, a, joint, p) + cone_depth(sk, b, joint, p));
  double worst = std::numeric_limits<double>::max();
  for (int m : sk.bones_at(joint)) {
    if (m == a || m == b) continue;
    worst = std::min(worst, la - cone_depth(sk, m, joint, p));
  }
  return worst;
}

JointConnection tangent_connection(const Skeleton& sk, int bone, double azimuth, JointConnection conn, int other) {
  conn.tangent_plane = true;
  conn.kind = JointKind::kCorner;
  double roots[2];
  const int n = azimuths_in_plane(sk, other, conn.other_end, conn.support, roots);
  if (n > 0) {
    conn.other_azimuth = roots[0];
  } else {
    conn.other_azimuth = sk.azimuth_of(other, conn.v);
  }
  conn.x = conn.v;
  // The anchor stays on the generatrix so the segment keeps its meridian plane.
  const Plane sep = separator_plane(sk, bone, other, conn.sphere).plane;
  const Vec3 g = generatrix_dir(sk, bone, azimuth);
  const double den = dot(g, sep.unit_normal);
  conn.anchor = sep.project(conn.v);
  if (std::abs(den) > sk.tol().eps_parallel) {
    const Vec3 along = conn.v - g * (sep.signed_distance(conn.v) / den);
    if (distance(along, conn.anchor) <= sk.tol().eps_surf) conn.anchor = along;
  }
  return conn;
}

}  // namespace

Arc3 reversed_arc(const Arc3& a) {
  Arc3 r = a;
  r.plane_normal = -a.plane_normal;
  r.start_angle = -a.end_angle;
  r.end_angle = -a.start_angle;
  return r;
}

Arc3 make_arc(const Vec3& center, double radius, const Vec3& normal, const Vec3& from, double sweep) {
  Arc3 a;
  a.center = center;
  a.radius = radius;
  a.plane_normal = normal;
  const Vec3 r = from - center;
  const Vec3 in_plane = r - normal * dot(r, normal);
  a.ref = norm2(in_plane) > 0.0 ? normalized(in_plane) : any_orthogonal(normal);
  a.start_angle = 0.0;
  a.end_angle = sweep;
  return a;
}

double arc_plane_crossing(const Arc3& arc, const Plane& plane) {
  const Vec3 side = cross(arc.plane_normal, arc.ref);
  const double a = arc.radius * dot(plane.unit_normal, arc.ref);
  const double b = arc.radius * dot(plane.unit_normal, side);
  const double c = -plane.signed_distance(arc.center);
  const double sweep = arc.sweep();
  if (sweep <= 0.0) return 0.0;
  double roots[2];
  const int n = solve_trig(a, b, c, roots);
  constexpr double kSlack = 1e-9;
  double best = -1.0;
  double best_err = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) {
    double rel = wrap_two_pi(roots[i] - arc.start_angle);
    if (rel > kTwoPi - kSlack) rel -= kTwoPi;
    const double u = rel / sweep;
    const double err = u < 0.0 ? -u : (u > 1.0 ? u - 1.0 : 0.0);
    if (err < best_err) {
      best_err = err;
      best = u;
    }
  }
  if (best >= 0.0 && best_err * sweep <= kSlack) return std::clamp(best, 0.0, 1.0);
  const double d0 = std::abs(plane.signed_distance(arc.at(0.0)));
  const double d1 = std::abs(plane.signed_distance(arc.at(1.0)));
  return d0 <= d1 ? 0.0 : 1.0;
}

Vec3 BaselineElement::tangent(double s) const {
  if (kind == ElementKind::kSegment) return normalized(p1 - p0);
  return arc.tangent(s);
}

double cone_depth(const Skeleton& sk, int bone, int joint, const Vec3& p) {
  const Bone& b = sk.bone(bone);
  const SphereNode& s = sk.sphere(joint);
  const Vec3 t0 = s.center + b.cone.axis_dir * (s.radius * b.cone.sin_alpha);
  return dot(p - t0, into_bone(sk, bone, joint)) / b.cone.cos_alpha;
}

SeparatorPlane separator_plane(const Skeleton& sk, int a, int b, int joint) {
  const Bone& ba = sk.bone(a);
  const Bone& bb = sk.bone(b);
  const SphereNode& s = sk.sphere(joint);
  const Vec3 wa = into_bone(sk, a, joint) / ba.cone.cos_alpha;
  const Vec3 wb = into_bone(sk, b, joint) / bb.cone.cos_alpha;
  const Vec3 ta = s.center + ba.cone.axis_dir * (s.radius * ba.cone.sin_alpha);
  const Vec3 tb = s.center + bb.cone.axis_dir * (s.radius * bb.cone.sin_alpha);
  const Vec3 n = wa - wb;
  const double n2 = norm2(n);
  if (n2 < kEpsParallel) throw Error(ErrorCode::kDegenerateBone, "overlapping bones at joint");
  const double d = dot(ta, wa) - dot(tb, wb);
  SeparatorPlane out;
  out.plane = Plane::from_normal(n * (d / n2), n);
  out.sphere = joint;
  out.bone_a = a;
  out.bone_b = b;
  return out;
}

Plane sheaf_plane(const Skeleton& sk, int a, int b, int joint, const Vec3& q) {
  const HomPoint& ha = sk.bone(a).cone.apex_h;
  const HomPoint& hb = sk.bone(b).cone.apex_h;
  const Vec3 da = normalized(ha.xyz - q * ha.w);
  const Vec3 db = normalized(hb.xyz - q * hb.w);
  Vec3 n = cross(da, db);
  if (norm(n) < kEpsParallel) {
    const Vec3 u = sk.bone(a).cone.axis_dir;
    n = cross(u, q - sk.sphere(joint).center);
    if (norm(n) < kEpsParallel * sk.tol().scene_diagonal) n = cross(u, any_orthogonal(u));
  }
  return Plane::from_normal(q, n);
}

int azimuths_in_plane(const Skeleton& sk, int bone, int end_index, const Plane& plane, double out[2]) {
  const Bone& b = sk.bone(bone);
  const SphereNode& s = sk.sphere(b.sphere_at(end_index));
  const Vec3 side = cross(b.cone.axis_dir, b.frame_ref);
  const Vec3& n = plane.unit_normal;
  const double rc = s.radius * b.cone.cos_alpha;
  const double a = rc * dot(b.frame_ref, n);
  const double bb = rc * dot(side, n);
  const double c = -(plane.signed_distance(s.center) + s.radius * b.cone.sin_alpha * dot(b.cone.axis_dir, n));
  const int count = solve_trig(a, bb, c, out);
  for (int i = 0; i < count; ++i) out[i] = wrap_two_pi(out[i]);
  return count;
}

JointConnection free_closure(const Skeleton& sk, int bone, double azimuth, int end_index) {
  const Bone& b = sk.bone(bone);
  const SphereNode& s = sk.sphere(b.sphere_at(end_index));
  JointConnection conn;
  conn.kind = JointKind::kFree;
  conn.sphere = b.sphere_at(end_index);
  conn.v = sk.tangency_point(bone, end_index, azimuth);
  conn.pole = s.center + b.cone.axis_dir * (end_index == 1 ? s.radius : -s.radius);
  const Vec3 a = normalized(conn.v - s.center);
  const Vec3 p = normalized(conn.pole - s.center);
  Vec3 n = cross(a, p);
  if (norm(n) < kEpsParallel) n = cross(b.cone.axis_dir, sk.azimuth_dir(bone, azimuth));
  const double sweep = std::atan2(norm(cross(a, p)), dot(a, p));
  conn.arc = make_arc(s.center, s.radius, normalized(n), conn.v, sweep);
  conn.anchor = conn.pole;
  conn.x = conn.pole;
  conn.support = Plane::from_normal(s.center, n);
  return conn;
}

JointConnection connect_at_joint(const Skeleton& sk, int bone, double azimuth, int end_index, int other) {
  const Bone& bk = sk.bone(bone);
  const int joint = bk.sphere_at(end_index);
  const SphereNode& s = sk.sphere(joint);
  const Tolerances& tol = sk.tol();

  JointConnection conn;
  conn.sphere = joint;
  conn.other_bone = other;
  conn.other_end = sk.bone(other).end_of(joint);
  conn.v = sk.tangency_point(bone, end_index, azimuth);
  conn.support = sheaf_plane(sk, bone, other, joint, conn.v);

  // Tangency is judged on the section radius, not the plane distance.
  const auto hit = plane_sphere_intersection(conn.support, s.center, s.radius, 0.0);
  if (!hit || hit->circle.radius < tol.eps_tan) return tangent_connection(sk, bone, azimuth, conn, other);

  double roots[2];
  int n = azimuths_in_plane(sk, other, conn.other_end, conn.support, roots);
  if (n == 0) return tangent_connection(sk, bone, azimuth, conn, other);
  if (n == 1) roots[1] = roots[0];

  PlaneFrame f;
  f.c = hit->circle.center;
  f.n = conn.support.unit_normal;
  f.e1 = normalized(conn.v - f.c);
  f.e1 = normalized(f.e1 - f.n * dot(f.e1, f.n));
  f.e2 = cross(f.n, f.e1);
  const double rho = hit->circle.radius;

  const double mu_k = f.angle_of_dir(-into_bone(sk, bone, joint));
  const double mu_m = f.angle_of_dir(-into_bone(sk, other, joint));
  const double v_rel = wrap_pi(0.0 - mu_k);
  const double h_k = std::abs(v_rel);

  Vec3 xs[2] = {sk.tangency_point(other, conn.other_end, roots[0]),
                sk.tangency_point(other, conn.other_end, roots[1])};
  double xr[2] = {wrap_pi(f.angle(xs[0]) - mu_m), wrap_pi(f.angle(xs[1]) - mu_m)};
  const int is = xr[0] <= xr[1] ? 0 : 1;  // far-arc start of the other bone
  const int ie = 1 - is;
  const double h_m = 0.5 * (std::abs(xr[0]) + std::abs(xr[1]));

  const bool v_is_end = v_rel > 0.0;
  const int ix = v_is_end ? is : ie;
  conn.x = xs[ix];
  conn.other_azimuth = roots[ix];
  const double ax = f.angle(conn.x);

  constexpr double kAngSlack = 1e-12;
  bool convex;
  if (v_is_end) {
    convex = std::abs(wrap_pi(ax - mu_k)) <= h_k + kAngSlack;
  } else {
    convex = std::abs(wrap_pi(0.0 - mu_m)) <= h_m + kAngSlack;
  }

  double sweep = v_is_end ? wrap_two_pi(0.0 - ax) : wrap_two_pi(ax);
  if (sweep > kTwoPi - kAngSlack) sweep = 0.0;
  if (convex && sweep * rho <= tol.eps_surf) {
    // V and X coincide: the segments meet without an arc.
    conn.kind = JointKind::kCorner;
    conn.anchor = conn.v;
    return conn;
  }
  if (convex) {
    conn.kind = JointKind::kArc;
    conn.arc = make_arc(f.c, rho, v_is_end ? -f.n : f.n, conn.v, sweep);
    const SeparatorPlane sep = separator_plane(sk, bone, other, joint);
    conn.anchor = conn.arc.at(arc_plane_crossing(conn.arc, sep.plane));
    return conn;
  }

  conn.kind = JointKind::kCorner;
  const Line3 lk{conn.v, generatrix_dir(sk, bone, azimuth)};
  const Line3 lm{conn.x, generatrix_dir(sk, other, conn.other_azimuth)};
  if (auto sp = line_line_intersection_in_plane(lk, lm, conn.support, tol.eps_parallel)) {
    conn.anchor = *sp;
    return conn;
  }
  // Near-parallel tangents: separator line of the support plane on the sphere.
  const SeparatorPlane sep = separator_plane(sk, bone, other, joint);
  conn.anchor = conn.v;
  if (auto line = plane_plane_intersection(conn.support, sep.plane)) {
    Vec3 pts[2];
    const int c = line_sphere_intersection(*line, s.center, s.radius, pts);
    if (c > 0) {
      conn.anchor = distance(pts[0], conn.v) <= distance(pts[c - 1], conn.v) ? pts[0] : pts[c - 1];
    }
  }
  return conn;
}

Vec3 pivot_crossing(const Skeleton& sk, int bone, const JointConnection& conn) {
  if (conn.kind == JointKind::kFree) return conn.anchor;
  const SeparatorPlane sep = separator_plane(sk, bone, conn.other_bone, conn.sphere);
  const SphereNode& s = sk.sphere(conn.sphere);
  auto line = plane_plane_intersection(conn.support, sep.plane);
  if (!line) return conn.anchor;
  Vec3 pts[2];
  const int c = line_sphere_intersection(*line, s.center, s.radius, pts);
  if (c == 0) return conn.anchor;
  return distance(pts[0], conn.anchor) <= distance(pts[c - 1], conn.anchor) ? pts[0] : pts[c - 1];
}

namespace {

// Partner across `end_index` and, when it was computed on the way, the
// connection to it.
int partner_with_connection(const Skeleton& sk, int bone, double azimuth, int end_index,
                            std::optional<JointConnection>* connection) {
  const int joint = sk.bone(bone).sphere_at(end_index);
  const std::vector<int>& at = sk.bones_at(joint);
  if (at.size() <= 1) return -1;
  if (at.size() == 2) return at[0] == bone ? at[1] : at[0];
  const std::vector<int> nbrs = sorted_by_id(sk, sk.neighbors(bone, joint));
  int best = nbrs.front();
  double best_margin = -std::numeric_limits<double>::max();
  for (int m : nbrs) {
    JointConnection conn = connect_at_joint(sk, bone, azimuth, end_index, m);
    const Vec3 e = pivot_crossing(sk, bone, conn);
    const double margin = cell_margin(sk, joint, bone, m, e);
    if (margin >= -sk.tol().eps_surf) {
      if (connection) *connection = std::move(conn);
      return m;
    }
    if (margin > best_margin) {
      best_margin = margin;
      best = m;
      if (connection) *connection = std::move(conn);
    }
  }
  return best;
}

}  // namespace

int partner_across(const Skeleton& sk, int bone, double azimuth, int end_index) {
  return partner_with_connection(sk, bone, azimuth, end_index, nullptr);
}

PivotArc pivot_arc(const Skeleton& sk, int joint, int bone_a, int bone_b) {
  if (bone_a > bone_b) std::swap(bone_a, bone_b);
  PivotArc out;
  out.bone_a = bone_a;
  out.bone_b = bone_b;
  out.sphere = joint;
  const SeparatorPlane sep = separator_plane(sk, bone_a, bone_b, joint);
  const SphereNode& s = sk.sphere(joint);
  const auto hit = plane_sphere_intersection(sep.plane, s.center, s.radius, sk.tol().eps_tan);
  if (!hit) throw Error(ErrorCode::kTangentPlane, "pivot plane misses the joint sphere");
  out.circle = hit->circle;
  const Vec3 n = out.circle.normal;
  const Vec3 fr = sk.bone(bone_a).frame_ref;
  Vec3 ref = fr - n * dot(fr, n);
  out.ref = norm(ref) > 1e-6 ? normalized(ref) : any_orthogonal(n);
  if (sk.bones_at(joint).size() < 3 || out.circle.radius <= 0.0) return out;

  constexpr int kSamples = 720;
  auto margin = [&](double a) { return cell_margin(sk, joint, bone_a, bone_b, out.circle.at(out.ref, a)); };
  std::vector<double> m(kSamples);
  bool all_in = true, any_in = false;
  for (int i = 0; i < kSamples; ++i) {
    m[static_cast<std::size_t>(i)] = margin(kTwoPi * i / kSamples);
    all_in = all_in && m[static_cast<std::size_t>(i)] >= 0.0;
    any_in = any_in || m[static_cast<std::size_t>(i)] >= 0.0;
  }
  if (all_in) return out;
  out.full = false;
  if (!any_in) {
    out.start = out.end = 0.0;
    return out;
  }
  // Longest run of non-negative margin, cyclically.
  int best_start = 0, best_len = 0;
  for (int i = 0; i < kSamples; ++i) {
    const int prev = (i + kSamples - 1) % kSamples;
    if (m[static_cast<std::size_t>(i)] < 0.0 || m[static_cast<std::size_t>(prev)] >= 0.0) continue;
    int len = 0;
    while (len < kSamples && m[static_cast<std::size_t>((i + len) % kSamples)] >= 0.0) ++len;
    if (len > best_len) {
      best_len = len;
      best_start = i;
    }
  }
  auto refine = [&](double lo, double hi) {  // margin(lo) < 0 <= margin(hi) or reverse
    const bool lo_in = margin(lo) >= 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((margin(mid) >= 0.0) == lo_in) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double step = kTwoPi / kSamples;
  const double a_in = best_start * step;
  const double a_out = (best_start + best_len) * step;
  out.start = refine(a_in - step, a_in);
  out.end = refine(a_out - step, a_out);
  if (out.end <= out.start) out.end += kTwoPi;
  return out;
}

double junction_pivot_coordinate(const PivotArc& arc, const Vec3& point, double tol) {
  const Vec3 side = cross(arc.circle.normal, arc.ref);
  const Vec3 v = point - arc.circle.center;
  const double theta = std::atan2(dot(v, side), dot(v, arc.ref));
  if (arc.full) return wrap_two_pi(theta) / kTwoPi;
  const double span = arc.end - arc.start;
  const double rel = wrap_two_pi(theta - arc.start);
  if (rel <= span) return span > 0.0 ? rel / span : 0.0;
  const double ang_tol = arc.circle.radius > 0.0 ? tol / arc.circle.radius : 0.0;
  if (rel - span <= ang_tol) return 1.0;
  if (kTwoPi - rel <= ang_tol) return 0.0;
  throw Error(ErrorCode::kWrongCell, "point outside the junction cell of the bone pair");
}

double junction_pivot_coordinate(const Skeleton& sk, int joint, int bone_a, int bone_b, const Vec3& point) {
  return junction_pivot_coordinate(pivot_arc(sk, joint, bone_a, bone_b), point, sk.tol().eps_surf);
}

Vec3 point_at_pivot_coordinate(const PivotArc& arc, double c) {
  const double span = arc.full ? kTwoPi : arc.end - arc.start;
  const double start = arc.full ? 0.0 : arc.start;
  return arc.circle.at(arc.ref, start + c * span);
}

std::pair<int, double> BaselinePortion::locate(double s) const {
  const int n = static_cast<int>(elements.size());
  auto it = std::upper_bound(element_offsets.begin(), element_offsets.end(), s);
  int e = std::clamp(static_cast<int>(it - element_offsets.begin()) - 1, 0, n - 1);
  // Skip zero-length elements at the boundary.
  while (e + 1 < n && elements[static_cast<std::size_t>(e)].length() <= 0.0 &&
         s >= element_offsets[static_cast<std::size_t>(e + 1)]) {
    ++e;
  }
  const double len = elements[static_cast<std::size_t>(e)].length();
  const double u = len > 0.0 ? (s - element_offsets[static_cast<std::size_t>(e)]) / len : 0.0;
  return {e, std::clamp(u, 0.0, 1.0)};
}

Vec3 BaselinePortion::point_at(double s) const {
  const auto [e, u] = locate(s);
  return elements[static_cast<std::size_t>(e)].at(u);
}

double BaselinePortion::arclength_of(int element, double u) const {
  return element_offsets[static_cast<std::size_t>(element)] +
         u * elements[static_cast<std::size_t>(element)].length();
}

std::pair<int, double> BaselinePortion::section_of(double s) const {
  const int n = section_count();
  int i = 0;
  while (i + 1 < n && s > breaks[static_cast<std::size_t>(i + 1)]) ++i;
  const double a = breaks[static_cast<std::size_t>(i)];
  const double b = breaks[static_cast<std::size_t>(i + 1)];
  const double t = b > a ? (s - a) / (b - a) : 0.0;
  return {i, std::clamp(t, 0.0, 1.0)};
}

double BaselinePortion::arclength_from_section(int section, double t) const {
  section = std::clamp(section, 0, section_count() - 1);
  const double a = breaks[static_cast<std::size_t>(section)];
  const double b = breaks[static_cast<std::size_t>(section + 1)];
  return a + t * (b - a);
}

std::vector<Vec3> BaselinePortion::polyline(double spacing) const {
  std::vector<Vec3> pts;
  for (const BaselineElement& el : elements) {
    const double len = el.length();
    const int n = el.kind == ElementKind::kSegment
                      ? 1
                      : std::max(1, static_cast<int>(std::ceil(len / std::max(spacing, 1e-300))));
    const int first = pts.empty() ? 0 : 1;
    for (int i = first; i <= n; ++i) pts.push_back(el.at(static_cast<double>(i) / n));
  }
  return pts;
}

namespace {

BaselinePortion portion_ends(const Skeleton& sk, int bone, double azimuth) {
  if (bone < 0 || bone >= sk.bone_count()) throw Error(ErrorCode::kDegenerateBone, "bone index out of range");
  if (!std::isfinite(azimuth)) throw Error(ErrorCode::kDegenerateBone, "non-finite azimuth");
  BaselinePortion p;
  p.bone = bone;
  p.azimuth = wrap_two_pi(azimuth);
  for (int e = 0; e < 2; ++e) {
    std::optional<JointConnection> known;
    const int m = partner_with_connection(sk, bone, p.azimuth, e, &known);
    if (m < 0) {
      p.ends[e] = free_closure(sk, bone, p.azimuth, e);
    } else {
      p.ends[e] = known ? std::move(*known) : connect_at_joint(sk, bone, p.azimuth, e, m);
    }
  }
  return p;
}

}  // namespace

BaselinePortion build_center(const Skeleton& sk, int bone, double azimuth) {
  BaselinePortion p = portion_ends(sk, bone, azimuth);
  const JointConnection& c0 = p.ends[0];
  const JointConnection& c1 = p.ends[1];
  BaselineElement el;
  el.kind = ElementKind::kSegment;
  el.bone = bone;
  el.azimuth = p.azimuth;
  el.p0 = c0.kind == JointKind::kCorner ? c0.anchor : c0.v;
  el.p1 = c1.kind == JointKind::kCorner ? c1.anchor : c1.v;
  el.lambda0 = generatrix_lambda(sk, bone, p.azimuth, el.p0);
  el.lambda1 = generatrix_lambda(sk, bone, p.azimuth, el.p1);
  p.center_element = 0;
  p.elements.push_back(el);
  return p;
}

BaselinePortion build_portion(const Skeleton& sk, int bone, double azimuth) {
  BaselinePortion p = portion_ends(sk, bone, azimuth);

  auto segment = [&](int b, double az, const Vec3& from, const Vec3& to) {
    BaselineElement el;
    el.kind = ElementKind::kSegment;
    el.bone = b;
    el.azimuth = az;
    el.p0 = from;
    el.p1 = to;
    el.lambda0 = generatrix_lambda(sk, b, az, from);
    el.lambda1 = generatrix_lambda(sk, b, az, to);
    return el;
  };
  auto arc_element = [&](const Arc3& a, int sphere) {
    BaselineElement el;
    el.kind = ElementKind::kArc;
    el.arc = a;
    el.sphere = sphere;
    el.p0 = a.at(0.0);
    el.p1 = a.at(1.0);
    return el;
  };
  auto other_far = [&](const JointConnection& c) {
    return sk.tangency_point(c.other_bone, 1 - c.other_end, c.other_azimuth);
  };

  // Anchor arclength positions, filled in order.
  std::vector<std::pair<int, double>> anchor_at;  // element, parameter
  anchor_at.reserve(2);
  p.elements.reserve(5);
  p.element_offsets.reserve(5);
  p.breaks.reserve(4);
  p.anchors.reserve(2);

  const JointConnection& c0 = p.ends[0];
  const JointConnection& c1 = p.ends[1];
  if (c0.kind == JointKind::kFree) {
    p.elements.push_back(arc_element(reversed_arc(c0.arc), c0.sphere));
  } else {
    const Vec3 near = c0.kind == JointKind::kCorner ? c0.anchor : c0.x;
    p.elements.push_back(segment(c0.other_bone, c0.other_azimuth, other_far(c0), near));
    if (c0.kind == JointKind::kArc) {
      const Arc3 a = reversed_arc(c0.arc);
      p.elements.push_back(arc_element(a, c0.sphere));
      const SeparatorPlane sep = separator_plane(sk, bone, c0.other_bone, c0.sphere);
      anchor_at.emplace_back(static_cast<int>(p.elements.size()) - 1, arc_plane_crossing(a, sep.plane));
    }
  }
  const Vec3 start = c0.kind == JointKind::kCorner ? c0.anchor : c0.v;
  const Vec3 end = c1.kind == JointKind::kCorner ? c1.anchor : c1.v;
  p.center_element = static_cast<int>(p.elements.size());
  if (c0.kind == JointKind::kCorner) anchor_at.emplace_back(p.center_element, 0.0);
  p.elements.push_back(segment(bone, p.azimuth, start, end));
  if (c1.kind == JointKind::kCorner) anchor_at.emplace_back(p.center_element, 1.0);
  if (c1.kind == JointKind::kFree) {
    p.elements.push_back(arc_element(c1.arc, c1.sphere));
  } else {
    if (c1.kind == JointKind::kArc) {
      p.elements.push_back(arc_element(c1.arc, c1.sphere));
      const SeparatorPlane sep = separator_plane(sk, bone, c1.other_bone, c1.sphere);
      anchor_at.emplace_back(static_cast<int>(p.elements.size()) - 1, arc_plane_crossing(c1.arc, sep.plane));
    }
    const Vec3 near = c1.kind == JointKind::kCorner ? c1.anchor : c1.x;
    p.elements.push_back(segment(c1.other_bone, c1.other_azimuth, near, other_far(c1)));
  }

  double acc = 0.0;
  for (const BaselineElement& el : p.elements) {
    p.element_offsets.push_back(acc);
    acc += el.length();
    if (el.kind == ElementKind::kSegment) p.support_plane_keys.push_back(el.azimuth);
  }
  p.breaks.push_back(0.0);
  for (int e = 0; e < 2; ++e) {
    const JointConnection& c = p.ends[e];
    if (c.kind == JointKind::kFree) continue;
    const auto [el, u] = anchor_at[p.anchors.size()];
    AnchorPoint a;
    a.position = p.elements[static_cast<std::size_t>(el)].at(u);
    a.sphere = c.sphere;
    a.kind = c.kind == JointKind::kArc ? AnchorKind::kOnArc : AnchorKind::kSegmentIntersection;
    p.anchors.push_back(a);
    p.breaks.push_back(p.arclength_of(el, u));
  }
  p.breaks.push_back(acc);
  return p;
}

std::optional<BaselinePortion> select_branch(const Skeleton& sk, int bone, const Vec3& p_tilde) {
  const BoneProjection proj = sk.project(bone, p_tilde);
  if (proj.region == BoneRegion::kCone) return build_portion(sk, bone, proj.azimuth);
  const int e = proj.region == BoneRegion::kStartCap ? 0 : 1;
  const int joint = sk.bone(bone).sphere_at(e);
  const std::vector<int> nbrs = sorted_by_id(sk, sk.neighbors(bone, joint));
  if (nbrs.empty()) return build_portion(sk, bone, sk.azimuth_of(bone, p_tilde));
  const double tol = sk.tol().eps_surf;
  for (int m : nbrs) {
    const Plane pl = sheaf_plane(sk, bone, m, joint, p_tilde);
    double roots[2];
    const int n = azimuths_in_plane(sk, bone, e, pl, roots);
    for (int i = 0; i < n; ++i) {
      if (partner_across(sk, bone, roots[i], e) != m) continue;
      const JointConnection c = connect_at_joint(sk, bone, roots[i], e, m);
      if (c.kind != JointKind::kArc) continue;
      if (std::abs(Plane{c.arc.center, c.arc.plane_normal}.signed_distance(p_tilde)) > tol) continue;
      const Vec3 side = cross(c.arc.plane_normal, c.arc.ref);
      const Vec3 v = p_tilde - c.arc.center;
      double a = wrap_two_pi(std::atan2(dot(v, side), dot(v, c.arc.ref)) - c.arc.start_angle);
      const double ang_tol = c.arc.radius > 0.0 ? tol / c.arc.radius : 0.0;
      if (a > kTwoPi - ang_tol) a -= kTwoPi;
      if (a >= -ang_tol && a <= c.arc.sweep() + ang_tol) return build_portion(sk, bone, roots[i]);
    }
  }
  return std::nullopt;
}

std::string baselines_to_json(const Skeleton& sk, const std::vector<BaselinePortion>& portions, double spacing) {
  nlohmann::json out;
  out["version"] = 1;
  nlohmann::json list = nlohmann::json::array();
  for (const BaselinePortion& p : portions) {
    nlohmann::json item;
    item["bone"] = sk.bone(p.bone).id;
    item["azimuth"] = p.azimuth;
    nlohmann::json pts = nlohmann::json::array();
    for (const Vec3& v : p.polyline(spacing)) pts.push_back({v.x, v.y, v.z});
    item["points"] = std::move(pts);
    list.push_back(std::move(item));
  }
  out["baselines"] = std::move(list);
  return out.dump();
}

}  // namespace bskin
