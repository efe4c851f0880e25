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

#include "bskin/deformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bskin/error.hpp"

namespace bskin {
namespace {

constexpr int kMinCurveIntervals = 16;
constexpr int kScanSamples = 64;

double weight_derivative(Profile profile, double d) {
  if (profile == Profile::kLinear) return 1.0;
  return 6.0 * d - 6.0 * d * d;
}

// Root of `count` azimuths closest to `target`.
double closest_azimuth(const double* roots, int count, double target) {
  double best = roots[0];
  for (int i = 1; i < count; ++i) {
    if (std::abs(wrap_pi(roots[i] - target)) < std::abs(wrap_pi(best - target))) best = roots[i];
  }
  return best;
}

Vec3 orthonormal_in(const Vec3& v, const Vec3& n) {
  const Vec3 p = v - n * dot(v, n);
  return norm2(p) > 0.0 ? normalized(p) : any_orthogonal(n);
}

DeformedElement connector(const Vec3& from, const Vec3& to, int sphere) {
  DeformedElement el;
  el.kind = DeformedKind::kConnector;
  el.p0 = from;
  el.p1 = to;
  el.sphere = sphere;
  return el;
}

DeformedElement arc_element(const Arc3& arc, int sphere) {
  DeformedElement el;
  el.kind = DeformedKind::kArc;
  el.arc = arc;
  el.sphere = sphere;
  el.p0 = arc.at(0.0);
  el.p1 = arc.at(1.0);
  return el;
}

DeformedElement curve_element(const DeformedCurve& c) {
  DeformedElement el;
  el.kind = DeformedKind::kCurve;
  el.curve = c;
  return el;
}

DeformedElement reversed_element(const DeformedElement& el) {
  DeformedElement r = el;
  if (el.kind == DeformedKind::kArc) {
    r.arc = reversed_arc(el.arc);
  } else if (el.kind == DeformedKind::kCurve) {
    r.curve.set_range(el.curve.lambda_b(), el.curve.lambda_a());
  }
  r.p0 = el.p1;
  r.p1 = el.p0;
  return r;
}

// Moves the range bound of `c` sitting at `end` to `lambda`.
void crop(DeformedCurve& c, double end, double lambda) {
  if (c.lambda_a() == end) {
    c.set_range(lambda, c.lambda_b());
  } else {
    c.set_range(c.lambda_a(), lambda);
  }
}

double far_bound(const DeformedCurve& c, double end) { return c.lambda_a() == end ? c.lambda_b() : c.lambda_a(); }

// Generatrix parameter where `c`, walking from `from` (negative side of
// sign * plane) toward `to`, reaches the plane; `to` when it never does.
double plane_crossing(const DeformedCurve& c, const Plane& pl, double sign, double from, double to, double tol) {
  auto g = [&](double l) { return sign * pl.signed_distance(c.at_lambda(l)); };
  double lo = from, glo = g(from);
  double hi = to, ghi = g(to);
  if (c.constant()) {
    if (ghi < 0.0) return to;
    return from + (to - from) * glo / (glo - ghi);
  }
  bool found = false;
  for (int i = 1; i <= kScanSamples; ++i) {
    const double l = from + (to - from) * (static_cast<double>(i) / kScanSamples);
    const double gl = g(l);
    if (gl >= 0.0) {
      hi = l;
      ghi = gl;
      found = true;
      break;
    }
    lo = l;
    glo = gl;
  }
  if (!found) return to;
  double x = lo + (hi - lo) * glo / (glo - ghi);
  for (int it = 0; it < 8; ++it) {
    const double gx = g(x);
    if (std::abs(gx) <= tol) break;
    if (gx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dg = sign * dot(pl.unit_normal, c.derivative(x));
    double next = dg != 0.0 ? x - gx / dg : 0.5 * (lo + hi);
    if (!(next > std::min(lo, hi) && next < std::max(lo, hi))) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace

double profile_weight(Profile profile, double d) {
  if (profile == Profile::kLinear) return d;
  return d * d * (3.0 - 2.0 * d);
}

double twist_profile(double d, double tau_max) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorCode::kOutOfRange, "twist profile parameter outside [0,1]");
  return tau_max * (d * d * (3.0 - 2.0 * d));
}

// ---------------------------------------------------------------------------
// DeformedCurve

DeformedCurve::DeformedCurve(const Skeleton& sk, int bone, double azimuth, double angle0, double angle1,
                             Profile profile, double lambda_a, double lambda_b)
    : bone_(bone),
      azimuth_(azimuth),
      angle0_(angle0),
      angle1_(angle1),
      profile_(profile),
      lambda_a_(lambda_a),
      lambda_b_(lambda_b) {
  const Bone& b = sk.bone(bone);
  c0_ = sk.sphere(b.start).center;
  c1_ = sk.sphere(b.end).center;
  r0_ = sk.sphere(b.start).radius;
  r1_ = sk.sphere(b.end).radius;
  axis_ = b.cone.axis_dir;
  ref_ = b.frame_ref;
  side_ = cross(axis_, ref_);
  cos_a_ = b.cone.cos_alpha;
  sin_a_ = b.cone.sin_alpha;
  sample_spacing_ = 0.01 * sk.tol().scene_diagonal;
  // |d/dlambda (c + r n)|^2 without rotation; n.axis = sin(alpha).
  const double len = distance(c0_, c1_);
  const double dr = r1_ - r0_;
  speed2_rigid_ = len * len + 2.0 * len * dr * sin_a_ + dr * dr;
}

void DeformedCurve::set_range(double lambda_a, double lambda_b) {
  lambda_a_ = lambda_a;
  lambda_b_ = lambda_b;
  lambdas_.clear();
  cumulative_.clear();
}

double DeformedCurve::angle_at(double lambda) const { return angle_with(lambda, profile_); }

double DeformedCurve::angle_with(double lambda, Profile profile) const {
  if (angle0_ == angle1_) return angle0_;
  const double d = std::clamp(lambda, 0.0, 1.0);
  return angle0_ + (angle1_ - angle0_) * profile_weight(profile, d);
}

Vec3 DeformedCurve::at_lambda(double lambda) const {
  const double a = azimuth_ + angle_at(lambda);
  const Vec3 n = (ref_ * std::cos(a) + side_ * std::sin(a)) * cos_a_ + axis_ * sin_a_;
  const Vec3 t0 = c0_ + n * r0_;
  const Vec3 t1 = c1_ + n * r1_;
  return t0 + (t1 - t0) * lambda;
}

Vec3 DeformedCurve::derivative(double lambda) const {
  const double a = azimuth_ + angle_at(lambda);
  const double ca = std::cos(a), sa = std::sin(a);
  const Vec3 n = (ref_ * ca + side_ * sa) * cos_a_ + axis_ * sin_a_;
  Vec3 d = (c1_ - c0_) + n * (r1_ - r0_);
  if (angle0_ != angle1_ && lambda > 0.0 && lambda < 1.0) {
    const Vec3 dn = (ref_ * -sa + side_ * ca) * cos_a_;
    const double r = r0_ + (r1_ - r0_) * lambda;
    d += dn * (r * (angle1_ - angle0_) * weight_derivative(profile_, lambda));
  }
  return d;
}

double DeformedCurve::speed(double lambda) const {
  if (angle0_ == angle1_) return std::sqrt(speed2_rigid_);
  const double d = std::clamp(lambda, 0.0, 1.0);
  const double r = r0_ + (r1_ - r0_) * lambda;
  const double turn = r * (angle1_ - angle0_) * weight_derivative(profile_, d) * cos_a_;
  return std::sqrt(speed2_rigid_ + turn * turn);
}

double DeformedCurve::arclength_between(double from, double to) const {
  // Three-point Gauss-Legendre.
  const double h = 0.5 * (to - from);
  const double m = 0.5 * (from + to);
  const double x = h * 0.77459666924148338;
  return std::abs(h) * (5.0 * (speed(m - x) + speed(m + x)) + 8.0 * speed(m)) / 9.0;
}

void DeformedCurve::sample() const {
  if (!lambdas_.empty()) return;
  const double chord = std::abs(lambda_b_ - lambda_a_) * std::sqrt(speed2_rigid_);
  int n = kMinCurveIntervals;
  if (sample_spacing_ > 0.0) n = std::max(n, static_cast<int>(std::ceil(chord / (4.0 * sample_spacing_))));
  lambdas_.resize(static_cast<std::size_t>(n) + 1);
  cumulative_.resize(static_cast<std::size_t>(n) + 1);
  lambdas_[0] = lambda_a_;
  cumulative_[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double l = lambda_a_ + (lambda_b_ - lambda_a_) * (static_cast<double>(i) / n);
    lambdas_[static_cast<std::size_t>(i)] = l;
    cumulative_[static_cast<std::size_t>(i)] =
        cumulative_[static_cast<std::size_t>(i) - 1] + arclength_between(lambdas_[static_cast<std::size_t>(i) - 1], l);
  }
}

double DeformedCurve::length() const {
  if (constant()) return distance(at_lambda(lambda_a_), at_lambda(lambda_b_));
  sample();
  return cumulative_.back();
}

double DeformedCurve::lambda_at(double u) const {
  if (constant()) return lambda_a_ + (lambda_b_ - lambda_a_) * u;
  sample();
  const double total = cumulative_.back();
  if (!(total > 0.0)) return lambda_a_ + (lambda_b_ - lambda_a_) * u;
  const double target = std::clamp(u, 0.0, 1.0) * total;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) return lambda_b_;
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  if (i == 0) return lambda_a_;
  const double lo = lambdas_[i - 1], hi = lambdas_[i];
  const double seg = cumulative_[i] - cumulative_[i - 1];
  const double rest = target - cumulative_[i - 1];
  double l = lo + (hi - lo) * (seg > 0.0 ? rest / seg : 0.0);
  // Newton on the arclength from the interval start.
  const double dir = hi >= lo ? 1.0 : -1.0;
  for (int it2 = 0; it2 < 2; ++it2) {
    const double v = speed(l);
    if (!(v > 0.0)) break;
    l -= dir * (arclength_between(lo, l) - rest) / v;
    l = std::clamp(l, std::min(lo, hi), std::max(lo, hi));
  }
  return l;
}

Vec3 DeformedCurve::tangent(double u) const {
  const Vec3 d = derivative(lambda_at(u));
  return normalized(lambda_b_ >= lambda_a_ ? d : -d);
}

std::vector<Vec3> DeformedCurve::polyline(int samples) const {
  samples = std::max(samples, 2);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    out.push_back(at_lambda(lambda_a_ + (lambda_b_ - lambda_a_) * (static_cast<double>(i) / (samples - 1))));
  }
  return out;
}

std::vector<Vec3> deform_segment(const Skeleton& posed, int bone, double azimuth, double lambda0, double lambda1,
                                 double angle0, double angle1, Profile profile, int samples) {
  return DeformedCurve(posed, bone, azimuth, angle0, angle1, profile, lambda0, lambda1).polyline(samples);
}

// ---------------------------------------------------------------------------
// Target angles

BendTargets resolve_bend_targets(const Skeleton& posed, int joint, int k, double azimuth_k, int m, double azimuth_m) {
  const HomPoint& ak = posed.bone(k).cone.apex_h;
  const HomPoint& am = posed.bone(m).cone.apex_h;
  if (!ak.at_infinity() && !am.at_infinity() &&
      distance(ak.point(), am.point()) <= posed.tol().eps_coplanar) {
    throw Error(ErrorCode::kSheafDegenerate, "coincident apexes at joint");
  }
  const int ek = posed.bone(k).end_of(joint);
  const int em = posed.bone(m).end_of(joint);
  const SphereNode& s = posed.sphere(joint);

  const JointConnection conn_v = connect_at_joint(posed, k, azimuth_k, ek, m);
  const JointConnection conn_x = connect_at_joint(posed, m, azimuth_m, em, k);
  BendTargets out;
  out.e_uv = pivot_crossing(posed, k, conn_v);
  out.e_yx = pivot_crossing(posed, m, conn_x);
  out.kind_uv = conn_v.kind;
  out.kind_yx = conn_x.kind;

  const SeparatorPlane sep = separator_plane(posed, k, m, joint);
  const auto hit = plane_sphere_intersection(sep.plane, s.center, s.radius, 0.0);
  if (hit && hit->circle.radius > posed.tol().eps_tan) {
    const Vec3 c = hit->circle.center;
    const Vec3 n = sep.plane.unit_normal;
    const Vec3 e1 = orthonormal_in(out.e_uv - c, n);
    const Vec3 e2 = cross(n, e1);
    const Vec3 w = out.e_yx - c;
    const double half = 0.5 * std::atan2(dot(w, e2), dot(w, e1));
    out.e_m = c + (e1 * std::cos(half) + e2 * std::sin(half)) * hit->circle.radius;
  } else {
    out.e_m = s.center + normalized(out.e_uv + out.e_yx - s.center * 2.0) * s.radius;
  }
  out.plane = sheaf_plane(posed, k, m, joint, out.e_m);

  double roots[2];
  int n = azimuths_in_plane(posed, k, ek, out.plane, roots);
  if (n > 0) {
    const double mid = azimuth_k + 0.5 * wrap_pi(conn_x.other_azimuth - azimuth_k);
    out.theta_v = wrap_pi(closest_azimuth(roots, n, mid) - azimuth_k);
  }
  n = azimuths_in_plane(posed, m, em, out.plane, roots);
  if (n > 0) {
    const double mid = azimuth_m + 0.5 * wrap_pi(conn_v.other_azimuth - azimuth_m);
    out.theta_x = wrap_pi(closest_azimuth(roots, n, mid) - azimuth_m);
  }
  out.v_prime = posed.tangency_point(k, ek, azimuth_k + out.theta_v);
  out.x_prime = posed.tangency_point(m, em, azimuth_m + out.theta_x);
  return out;
}

// ---------------------------------------------------------------------------
// Reconnection

Reconnection reconnect(const Skeleton& posed, int joint, DeformedCurve& center, int center_end, DeformedCurve& other,
                       int other_end) {
  const Tolerances& tol = posed.tol();
  const SphereNode& s = posed.sphere(joint);
  const double ce = center_end, oe = other_end;
  const Plane sep = separator_plane(posed, center.bone(), other.bone(), joint).plane;
  const Vec3 v = center.at_lambda(ce);
  const Vec3 x = other.at_lambda(oe);
  const double newton_tol = 1e-3 * tol.eps_surf;

  Reconnection out;
  out.anchor_element = -1;
  out.cropped_center = sep.signed_distance(v) < -tol.eps_surf;
  out.cropped_other = sep.signed_distance(x) > tol.eps_surf;
  Vec3 pk = v, pm = x;
  if (out.cropped_center) {
    const double l = plane_crossing(center, sep, 1.0, ce, far_bound(center, ce), newton_tol);
    crop(center, ce, l);
    pk = center.at_lambda(l);
  }
  if (out.cropped_other) {
    const double l = plane_crossing(other, sep, -1.0, oe, far_bound(other, oe), newton_tol);
    crop(other, oe, l);
    pm = other.at_lambda(l);
  }
  const double tiny = 1e-12 * tol.scene_diagonal;
  if (out.cropped_center || out.cropped_other) {
    out.kind = JointKind::kCorner;
    out.anchor = out.cropped_center ? pk : pm;
    if (distance(pk, pm) > tiny) {
      out.bridge.push_back(connector(pk, pm, joint));
      if (!out.cropped_center) {
        out.anchor_element = 0;
        out.anchor_u = 1.0;
      }
    }
    return out;
  }

  const Plane support = sheaf_plane(posed, center.bone(), other.bone(), joint, v);
  const auto hit = plane_sphere_intersection(support, s.center, s.radius, 0.0);
  if (!hit || hit->circle.radius < tol.eps_tan || distance(v, x) <= tol.eps_surf) {
    out.kind = JointKind::kCorner;
    out.anchor = v;
    if (distance(v, x) > tiny) out.bridge.push_back(connector(v, x, joint));
    return out;
  }
  const Vec3 c = hit->circle.center;
  const double rho = hit->circle.radius;
  Vec3 n = support.unit_normal;
  // Leave V' along the curve's outgoing tangent.
  const Vec3 outgoing = center.derivative(ce) * (ce == 1.0 ? 1.0 : -1.0);
  if (dot(cross(n, v - c), outgoing) < 0.0) n = -n;
  const Vec3 e1 = orthonormal_in(v - c, n);
  const Vec3 e2 = cross(n, e1);
  const Vec3 w = x - c;
  const double sweep = wrap_two_pi(std::atan2(dot(w, e2), dot(w, e1)));
  out.kind = JointKind::kArc;
  out.bridge.push_back(arc_element(make_arc(c, rho, n, v, sweep), joint));
  out.anchor_element = 0;
  out.anchor_u = arc_plane_crossing(out.bridge[0].arc, sep);
  out.anchor = out.bridge[0].arc.at(out.anchor_u);
  return out;
}

// ---------------------------------------------------------------------------
// Elements and portions

double DeformedElement::length() const {
  switch (kind) {
    case DeformedKind::kCurve:
      return curve.length();
    case DeformedKind::kArc:
      return arc.length();
    case DeformedKind::kConnector:
      break;
  }
  return distance(p0, p1);
}

Vec3 DeformedElement::at(double u) const {
  switch (kind) {
    case DeformedKind::kCurve:
      return curve.at(u);
    case DeformedKind::kArc:
      return arc.at(u);
    case DeformedKind::kConnector:
      break;
  }
  return lerp(p0, p1, u);
}

Vec3 DeformedElement::tangent(double u) const {
  switch (kind) {
    case DeformedKind::kCurve:
      return curve.tangent(u);
    case DeformedKind::kArc:
      return arc.tangent(u);
    case DeformedKind::kConnector:
      break;
  }
  return normalized(p1 - p0);
}

double DeformedPortion::section_length(int section) const {
  const auto [e0, u0] = boundaries[static_cast<std::size_t>(section)];
  const auto [e1, u1] = boundaries[static_cast<std::size_t>(section) + 1];
  double total = 0.0;
  for (int e = e0; e <= e1; ++e) {
    const double ua = e == e0 ? u0 : 0.0;
    const double ub = e == e1 ? u1 : 1.0;
    total += elements[static_cast<std::size_t>(e)].length() * (ub - ua);
  }
  return total;
}

std::pair<int, double> DeformedPortion::locate(int section, double t) const {
  const auto [e0, u0] = boundaries[static_cast<std::size_t>(section)];
  const auto [e1, u1] = boundaries[static_cast<std::size_t>(section) + 1];
  const double total = section_length(section);
  if (!(total > 0.0)) return {e0, u0};
  double target = std::clamp(t, 0.0, 1.0) * total;
  for (int e = e0; e <= e1; ++e) {
    const double ua = e == e0 ? u0 : 0.0;
    const double ub = e == e1 ? u1 : 1.0;
    const double len = elements[static_cast<std::size_t>(e)].length();
    const double piece = len * (ub - ua);
    if (target <= piece || e == e1) {
      const double u = len > 0.0 ? ua + target / len : ua;
      return {e, std::min(u, ub)};
    }
    target -= piece;
  }
  return {e1, u1};
}

Vec3 DeformedPortion::point_at(int section, double t) const {
  const auto [e, u] = locate(section, t);
  return elements[static_cast<std::size_t>(e)].at(u);
}

std::vector<Vec3> DeformedPortion::polyline(double spacing) const {
  std::vector<Vec3> out;
  for (const DeformedElement& el : elements) {
    const int n = std::max(2, static_cast<int>(std::ceil(el.length() / spacing)) + 1);
    for (int i = out.empty() ? 0 : 1; i < n; ++i) out.push_back(el.at(static_cast<double>(i) / (n - 1)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deformer

namespace {

// Normalized coordinate of `p` on the cell arc, clamped to the nearest end
// when the point left the cell.
double clamped_coordinate(const PivotArc& arc, const Vec3& p, double tol) {
  try {
    return junction_pivot_coordinate(arc, p, tol);
  } catch (const Error&) {
    const Vec3 side = cross(arc.circle.normal, arc.ref);
    const Vec3 v = p - arc.circle.center;
    const double rel = wrap_two_pi(std::atan2(dot(v, side), dot(v, arc.ref)) - arc.start);
    const double span = arc.end - arc.start;
    return rel - span < kTwoPi - rel ? 1.0 : 0.0;
  }
}

}  // namespace

Deformer::Deformer(const Skeleton& rest, const Pose& pose, DeformConfig config)
    : rest_(&rest), posed_(apply_pose(rest, pose)), config_(config), identity_(pose.is_identity()) {
  modified_.assign(static_cast<std::size_t>(rest.sphere_count()), 0);
  auto mark_bone = [&](int b) {
    modified_[static_cast<std::size_t>(rest.bone(b).start)] = 1;
    modified_[static_cast<std::size_t>(rest.bone(b).end)] = 1;
  };
  for (const Bend& bend : pose.bends) {
    if (bend.angle == 0.0) continue;
    if (auto s = rest.sphere_index(bend.joint_sphere_id)) modified_[static_cast<std::size_t>(*s)] = 1;
  }
  for (const auto& [id, scale] : pose.sphere_scales) {
    if (scale == 1.0) continue;
    if (auto s = rest.sphere_index(id)) {
      for (int b : rest.bones_at(*s)) mark_bone(b);
    }
  }
  for (const auto& [id, scale] : pose.bone_length_scales) {
    if (scale == 1.0) continue;
    if (auto b = rest.bone_index(id)) mark_bone(*b);
  }
  rigid_.assign(static_cast<std::size_t>(rest.bone_count()), 0);
  for (int b = 0; b < rest.bone_count(); ++b) {
    bool rigid = true;
    for (int j : {rest.bone(b).start, rest.bone(b).end}) {
      if (joint_modified(j)) rigid = false;
      for (int o : rest.bones_at(j)) {
        if (posed_.bone(o).twist != 0.0) rigid = false;
      }
    }
    rigid_[static_cast<std::size_t>(b)] = rigid ? 1 : 0;
  }
  for (int j : rest.junctions()) {
    const std::vector<int>& bones = rest.bones_at(j);
    for (std::size_t i = 0; i < bones.size(); ++i) {
      for (std::size_t l = i + 1; l < bones.size(); ++l) {
        const int a = std::min(bones[i], bones[l]);
        const int b = std::max(bones[i], bones[l]);
        try {
          rest_pivots_[{j, a, b}] = pivot_arc(rest, j, a, b);
          posed_pivots_[{j, a, b}] = pivot_arc(posed_, j, a, b);
        } catch (const Error&) {
          rest_pivots_.erase({j, a, b});
        }
      }
    }
  }
}

double Deformer::own_twist_at(int bone, int sphere) const {
  const Bone& b = posed_.bone(bone);
  return sphere == b.distal_sphere() ? b.twist : 0.0;
}

const PivotArc* Deformer::pivot(bool posed, int joint, int a, int b) const {
  const auto key = std::make_tuple(joint, std::min(a, b), std::max(a, b));
  const auto& cache = posed ? posed_pivots_ : rest_pivots_;
  const auto it = cache.find(key);
  return it == cache.end() ? nullptr : &it->second;
}

BendTargets Deformer::junction_targets(const JointConnection& rest_conn, int k, double azimuth_k,
                                       double azimuth_m) const {
  const int j = rest_conn.sphere;
  const int m = rest_conn.other_bone;
  const PivotArc* ra = pivot(false, j, k, m);
  const PivotArc* pa = pivot(true, j, k, m);
  if (ra == nullptr || pa == nullptr) return resolve_bend_targets(posed_, j, k, azimuth_k, m, azimuth_m);
  const Vec3 e = pivot_crossing(*rest_, k, rest_conn);
  const double c = clamped_coordinate(*ra, e, rest_->tol().eps_surf);
  BendTargets out;
  out.e_m = point_at_pivot_coordinate(*pa, c);
  out.e_uv = out.e_yx = out.e_m;
  out.plane = sheaf_plane(posed_, k, m, j, out.e_m);
  const int ek = posed_.bone(k).end_of(j);
  const int em = posed_.bone(m).end_of(j);
  double roots[2];
  int n = azimuths_in_plane(posed_, k, ek, out.plane, roots);
  if (n > 0) out.theta_v = wrap_pi(closest_azimuth(roots, n, azimuth_k) - azimuth_k);
  n = azimuths_in_plane(posed_, m, em, out.plane, roots);
  if (n > 0) out.theta_x = wrap_pi(closest_azimuth(roots, n, azimuth_m) - azimuth_m);
  out.v_prime = posed_.tangency_point(k, ek, azimuth_k + out.theta_v);
  out.x_prime = posed_.tangency_point(m, em, azimuth_m + out.theta_x);
  return out;
}

DeformedPortion Deformer::deform_portion(const BaselinePortion& portion) const {
  const int k = portion.bone;
  const Bone& bk = posed_.bone(k);
  DeformedPortion dp;
  dp.bone = k;

  double theta_k[2] = {0.0, 0.0};
  double theta_m[2] = {0.0, 0.0};
  for (int e = 0; e < 2; ++e) {
    const JointConnection& conn = portion.ends[e];
    if (conn.kind == JointKind::kFree || !joint_modified(conn.sphere)) continue;
    const int m = conn.other_bone;
    const double az_k = portion.azimuth + own_twist_at(k, conn.sphere);
    const double az_m = conn.other_azimuth + own_twist_at(m, conn.sphere);
    dp.targets[e] = rest_->is_junction(conn.sphere) ? junction_targets(conn, k, az_k, az_m)
                                                    : resolve_bend_targets(posed_, conn.sphere, k, az_k, m, az_m);
    dp.bent[e] = true;
    theta_k[e] = dp.targets[e].theta_v;
    theta_m[e] = dp.targets[e].theta_x;
  }

  DeformedCurve center(posed_, k, portion.azimuth, own_twist_at(k, bk.start) + theta_k[0],
                       own_twist_at(k, bk.end) + theta_k[1], config_.position, 0.0, 1.0);
  DeformedCurve others[2];
  Reconnection links[2];
  for (int e = 0; e < 2; ++e) {
    const JointConnection& conn = portion.ends[e];
    if (conn.kind == JointKind::kFree) continue;
    const int m = conn.other_bone;
    const int em = conn.other_end;
    const Bone& bm = posed_.bone(m);
    const double at_joint = own_twist_at(m, conn.sphere) + theta_m[e];
    const double at_far = own_twist_at(m, bm.sphere_at(1 - em));
    const double a0 = em == 0 ? at_joint : at_far;
    const double a1 = em == 0 ? at_far : at_joint;
    const double near = em, far = 1 - em;
    others[e] = e == 0 ? DeformedCurve(posed_, m, conn.other_azimuth, a0, a1, config_.position, far, near)
                       : DeformedCurve(posed_, m, conn.other_azimuth, a0, a1, config_.position, near, far);
    links[e] = reconnect(posed_, conn.sphere, center, e, others[e], em);
  }

  std::vector<std::pair<int, double>> anchor_at;
  anchor_at.reserve(2);
  dp.elements.reserve(7);
  dp.anchors.reserve(2);
  dp.boundaries.reserve(4);
  auto push = [&](DeformedElement el) {
    dp.elements.push_back(std::move(el));
    return static_cast<int>(dp.elements.size()) - 1;
  };
  const JointConnection& c0 = portion.ends[0];
  const JointConnection& c1 = portion.ends[1];
  if (c0.kind == JointKind::kFree) {
    const JointConnection fc = free_closure(posed_, k, center.azimuth_at(0.0), 0);
    push(arc_element(reversed_arc(fc.arc), fc.sphere));
  } else {
    push(curve_element(others[0]));
    const std::vector<DeformedElement>& br = links[0].bridge;
    const int base = static_cast<int>(dp.elements.size());
    for (auto it = br.rbegin(); it != br.rend(); ++it) push(reversed_element(*it));
    if (links[0].anchor_element >= 0) {
      anchor_at.emplace_back(base + static_cast<int>(br.size()) - 1 - links[0].anchor_element,
                             1.0 - links[0].anchor_u);
    } else {
      anchor_at.emplace_back(static_cast<int>(dp.elements.size()), 0.0);
    }
  }
  dp.center_element = push(curve_element(center));
  if (c1.kind == JointKind::kFree) {
    const JointConnection fc = free_closure(posed_, k, center.azimuth_at(1.0), 1);
    push(arc_element(fc.arc, fc.sphere));
  } else {
    const int base = static_cast<int>(dp.elements.size());
    for (const DeformedElement& el : links[1].bridge) push(el);
    if (links[1].anchor_element >= 0) {
      anchor_at.emplace_back(base + links[1].anchor_element, links[1].anchor_u);
    } else {
      anchor_at.emplace_back(dp.center_element, 1.0);
    }
    push(curve_element(others[1]));
  }

  dp.boundaries.emplace_back(0, 0.0);
  int ai = 0;
  for (int e = 0; e < 2; ++e) {
    const JointConnection& conn = portion.ends[e];
    if (conn.kind == JointKind::kFree) continue;
    const auto [el, u] = anchor_at[static_cast<std::size_t>(ai++)];
    AnchorPoint a;
    a.position = dp.elements[static_cast<std::size_t>(el)].at(u);
    a.sphere = conn.sphere;
    a.kind = links[e].kind == JointKind::kArc ? AnchorKind::kOnArc : AnchorKind::kSegmentIntersection;
    dp.anchors.push_back(a);
    dp.boundaries.emplace_back(el, u);
  }
  dp.boundaries.emplace_back(static_cast<int>(dp.elements.size()) - 1, 1.0);
  return dp;
}

DirectionSample Deformer::direction_at(const DeformedPortion& dp, int element, double u) const {
  const DeformedElement& el = dp.elements[static_cast<std::size_t>(element)];
  DirectionSample out;
  if (el.kind != DeformedKind::kCurve) {
    out.base = el.at(u);
    out.dir = normalized(out.base - posed_.sphere(el.sphere).center);
    out.surface_normal = out.dir;
    return out;
  }
  const DeformedCurve& c = el.curve;
  const double lambda = c.lambda_at(u);
  out.base = c.at_lambda(lambda);
  out.surface_normal = posed_.cone_normal(c.bone(), c.azimuth_at(lambda));
  out.dir = out.surface_normal;
  try {
    const double az = c.azimuth() + c.angle_with(lambda, config_.direction);
    const BaselinePortion local = build_center(posed_, c.bone(), az);
    const BaselineElement& seg = local.elements[static_cast<std::size_t>(local.center_element)];
    const double span = seg.lambda1 - seg.lambda0;
    const double v = std::abs(span) > 0.0 ? (lambda - seg.lambda0) / span : 0.5;
    out.dir = segment_field(posed_, local, local.center_element).direction(v);
  } catch (const Error&) {
  }
  return out;
}

Vec3 Deformer::rigid_point(const EncodedPoint& ep) const {
  const auto bi = rest_->bone_index(static_cast<int>(ep.bone_id));
  if (!bi) throw Error(ErrorCode::kSkeletonMismatch, "encoded bone id not in skeleton");
  const Bone& rb = rest_->bone(*bi);
  const Bone& pb = posed_.bone(*bi);
  const double axial = rb.length > 0.0 ? ep.t * (pb.length / rb.length) : ep.t;
  double d = rb.length > 0.0 ? std::clamp(ep.t / rb.length, 0.0, 1.0) : 0.0;
  if (!rb.start_is_proximal) d = 1.0 - d;
  const double az = ep.azimuth + pb.twist * profile_weight(config_.position, d);
  return posed_.sphere(pb.start).center + pb.cone.axis_dir * axial + posed_.azimuth_dir(*bi, az) * ep.h;
}

Vec3 Deformer::carry(int bone, const Vec3& p) const {
  const int s = rest_->bone(bone).start;
  return posed_.sphere(s).center + posed_.bone(bone).rotation * (p - rest_->sphere(s).center);
}

DisplacedBase Deformer::displace_base_point(const EncodedPoint& ep) const {
  const auto bi = rest_->bone_index(static_cast<int>(ep.bone_id));
  if (!bi) throw Error(ErrorCode::kSkeletonMismatch, "encoded bone id not in skeleton");
  DisplacedBase out;
  if (ep.rigid()) {
    out.base = rigid_point(ep);
    return out;
  }
  const BaselinePortion portion = build_portion(*rest_, *bi, ep.azimuth);
  if (identity_) {
    const double s = portion.arclength_from_section(static_cast<int>(ep.section), ep.t);
    const DirectionSample d = bskin::direction_at(*rest_, portion, s);
    out.base = d.base;
    out.dir = d.dir;
    out.sin_beta = ep.sin_beta;
    return out;
  }
  const DeformedPortion dp = deform_portion(portion);
  const int section = std::min(static_cast<int>(ep.section), dp.section_count() - 1);
  out.section_collapsed = dp.section_length(section) < 1e-12;
  const auto [e, u] = dp.locate(section, ep.t);
  const DirectionSample d = direction_at(dp, e, u);
  out.base = d.base;
  out.dir = d.dir;
  if (dp.elements[static_cast<std::size_t>(e)].kind == DeformedKind::kCurve) {
    out.sin_beta = std::min(1.0, d.sin_beta());
    if (out.sin_beta <= kEpsSin) {
      out.sin_beta = kEpsSin;
      out.near_tangent = true;
    }
  }
  return out;
}

DeformedPortion deform_portion(const Skeleton& rest, const Pose& pose, const BaselinePortion& portion,
                               DeformConfig config) {
  return Deformer(rest, pose, config).deform_portion(portion);
}

}  // namespace bskin
