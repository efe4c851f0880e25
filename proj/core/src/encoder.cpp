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

#include "bskin/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "bskin/parallel.hpp"

namespace bskin {
namespace {

constexpr int kMaxAttempts = 4;
constexpr double kParamSlack = 1e-12;

// True when endpoint `end` (0: p0, 1: p1) of `element` is a corner anchor.
const JointConnection* corner_at(const BaselinePortion& p, int element, int end) {
  const int c = p.center_element;
  const JointConnection* conn = nullptr;
  if (element == c) {
    conn = &p.ends[end];
  } else if (element < c && end == 1) {
    conn = &p.ends[0];
  } else if (element > c && end == 0) {
    conn = &p.ends[1];
  }
  return conn != nullptr && conn->kind == JointKind::kCorner ? conn : nullptr;
}

Vec3 rigid_position(const Skeleton& sk, int bone, double azimuth, double axial, double radial) {
  const Bone& b = sk.bone(bone);
  return sk.sphere(b.start).center + b.cone.axis_dir * axial + sk.azimuth_dir(bone, azimuth) * radial;
}

EncodedPoint rigid_encode(const Skeleton& sk, int bone, const Vec3& p, std::uint64_t index, std::uint32_t reason) {
  const Bone& b = sk.bone(bone);
  EncodedPoint out;
  out.point_index = index;
  out.chain_id = static_cast<std::uint32_t>(b.chain);
  out.bone_id = static_cast<std::uint32_t>(b.id);
  const Vec3 v = p - sk.sphere(b.start).center;
  const double x = dot(v, b.cone.axis_dir);
  const Vec3 radial = v - b.cone.axis_dir * x;
  out.azimuth = norm(radial) > 0.0 ? sk.azimuth_of(bone, p) : 0.0;
  out.t = x;
  out.h = norm(radial);
  out.section = 0;
  out.sin_beta = 1.0;
  out.flags = kFlagRigid | reason;
  return out;
}

struct Hit {
  BaselinePortion portion;
  int element = 0;
  double u = 0.0;
};

EncodedPoint finalize(const Skeleton& sk, const Hit& hit, const Vec3& p, std::uint64_t index, std::uint32_t flags) {
  const BaselinePortion& portion = hit.portion;
  const double s = portion.arclength_of(hit.element, hit.u);
  const DirectionSample d = direction_at(sk, portion, s);
  const auto [section, t] = portion.section_of(s);
  const Bone& b = sk.bone(portion.bone);
  EncodedPoint out;
  out.point_index = index;
  out.chain_id = static_cast<std::uint32_t>(b.chain);
  out.bone_id = static_cast<std::uint32_t>(b.id);
  out.azimuth = portion.azimuth;
  out.section = static_cast<std::uint32_t>(section);
  out.t = t;
  out.h = dot(p - d.base, d.dir);
  const bool on_arc = portion.elements[static_cast<std::size_t>(portion.locate(s).first)].kind == ElementKind::kArc;
  out.sin_beta = on_arc ? 1.0 : std::clamp(d.sin_beta(), kEpsSin, 1.0);
  out.flags = flags | (on_arc ? kFlagOnCap : 0u);
  return out;
}

enum class SegmentStatus { kHit, kBeyondStart, kBeyondEnd, kApex };

SegmentStatus try_segment(const Skeleton& sk, int bone, double azimuth, const Vec3& p, Hit& hit) {
  hit.portion = build_portion(sk, bone, azimuth);
  hit.element = hit.portion.center_element;
  const SegmentField f = segment_field(sk, hit.portion, hit.element);
  const auto inv = f.invert(p);
  if (!inv) return SegmentStatus::kApex;
  const double u = inv->first;
  if (u < -kParamSlack) return SegmentStatus::kBeyondStart;
  if (u > 1.0 + kParamSlack) return SegmentStatus::kBeyondEnd;
  hit.u = std::clamp(u, 0.0, 1.0);
  return SegmentStatus::kHit;
}

std::optional<std::pair<int, double>> locate_on_portion(const BaselinePortion& p, const Vec3& q, double tol) {
  int best = -1;
  double best_u = 0.0, best_d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < p.elements.size(); ++i) {
    const BaselineElement& el = p.elements[i];
    double u = 0.0;
    if (el.kind == ElementKind::kSegment) {
      const Vec3 g = el.p1 - el.p0;
      const double g2 = norm2(g);
      u = g2 > 0.0 ? std::clamp(dot(q - el.p0, g) / g2, 0.0, 1.0) : 0.0;
    } else {
      const Arc3& a = el.arc;
      const Vec3 side = cross(a.plane_normal, a.ref);
      const Vec3 v = q - a.center;
      double rel = wrap_two_pi(std::atan2(dot(v, side), dot(v, a.ref)) - a.start_angle);
      if (rel > 0.5 * (kTwoPi + a.sweep())) rel -= kTwoPi;
      u = a.sweep() > 0.0 ? std::clamp(rel / a.sweep(), 0.0, 1.0) : 0.0;
    }
    const double d = distance(q, el.at(u));
    // Prefer arcs on ties so cap points get the sphere normal.
    if (d < best_d || (d == best_d && el.kind == ElementKind::kArc)) {
      best = static_cast<int>(i);
      best_u = u;
      best_d = d;
    }
  }
  if (best < 0 || best_d > tol) return std::nullopt;
  return std::make_pair(best, best_u);
}

bool try_cap(const Skeleton& sk, int bone, int end_index, const Vec3& p, Hit& hit) {
  const SphereNode& s = sk.sphere(sk.bone(bone).sphere_at(end_index));
  const Vec3 v = p - s.center;
  const double n = norm(v);
  if (n <= sk.tol().eps_r) return false;
  const Vec3 p_tilde = s.center + v * (s.radius / n);
  const int joint = sk.bone(bone).sphere_at(end_index);
  std::vector<int> candidates = {bone};
  for (int m : sk.neighbors(bone, joint)) candidates.push_back(m);
  // At a junction the cap region may be covered by another bone's baselines.
  for (int b : candidates) {
    if (b != bone && sk.project(b, p_tilde).region == BoneRegion::kCone) continue;
    auto portion = select_branch(sk, b, p_tilde);
    if (!portion) continue;
    auto loc = locate_on_portion(*portion, p_tilde, 10.0 * sk.tol().eps_surf);
    if (!loc) continue;
    hit.portion = std::move(*portion);
    hit.element = loc->first;
    hit.u = loc->second;
    return true;
  }
  return false;
}

// Overlap rule: inside two adjacent bones, use the one whose surface is farther.
int choose_bone(const Skeleton& sk, int bone, const Vec3& p) {
  const double sd = sk.signed_distance(bone, p);
  int best = bone;
  double best_depth = sd < 0.0 ? -sd : 0.0;
  const Bone& b = sk.bone(bone);
  for (int sphere : {b.start, b.end}) {
    for (int m : sk.neighbors(bone, sphere)) {
      const double sm = sk.signed_distance(m, p);
      if (sm < 0.0 && -sm > best_depth) {
        best_depth = -sm;
        best = m;
      }
    }
  }
  return best;
}

}  // namespace

Vec3 SegmentField::direction(double u) const {
  Vec3 w = d0 * ((1.0 - u) * s0) + d1 * (u * s1);
  if (dot(w, cone_normal) < 0.0) w = -w;
  return normalized(w);
}

std::optional<std::pair<double, double>> SegmentField::invert(const Vec3& p) const {
  const Vec3 q = p - e0;
  const Vec3 g = e1 - e0;
  const Vec3 a = d0 * s0;
  const Vec3 delta = d1 * s1 - a;
  const Vec3& m = plane_normal;
  // cross(q - u g, a + u delta) . m = 0
  const double c0 = dot(cross(q, a), m);
  const double c1 = dot(cross(q, delta) - cross(g, a), m);
  const double c2 = -dot(cross(g, delta), m);
  double u;
  if (std::abs(c2) <= 1e-12 * (std::abs(c1) + std::abs(c0))) {
    if (c1 == 0.0) return std::nullopt;
    u = -c0 / c1;
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (c1 + std::copysign(sq, c1));
    const double r0 = qq / c2;
    const double r1 = qq != 0.0 ? c0 / qq : r0;
    auto outside = [](double x) { return x < 0.0 ? -x : (x > 1.0 ? x - 1.0 : 0.0); };
    u = outside(r0) <= outside(r1) ? r0 : r1;
  }
  // Newton polish on the direct residual; the coefficients lose digits when
  // the endpoint directions are nearly parallel.
  for (int it = 0; it < 3; ++it) {
    const Vec3 w = a + delta * u;
    const Vec3 r = q - g * u;
    const double f = dot(cross(r, w), m);
    const double df = dot(cross(r, delta) - cross(g, w), m);
    if (df == 0.0) break;
    const double step = f / df;
    u -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(u))) break;
  }
  const Vec3 b = lerp(e0, e1, u);
  const Vec3 n = direction(u);
  const double h = dot(p - b, n);
  if (!parallel && s0 > 0.0 && s1 > 0.0) {
    const Vec3 apex = e0 + d0 * s0;
    if (h >= distance(b, apex) * (1.0 - 1e-9)) return std::nullopt;
  }
  return std::make_pair(u, h);
}

SegmentField segment_field(const Skeleton& sk, const BaselinePortion& portion, int element) {
  const BaselineElement& el = portion.elements[static_cast<std::size_t>(element)];
  SegmentField f;
  f.e0 = el.p0;
  f.e1 = el.p1;
  f.cone_normal = sk.cone_normal(el.bone, el.azimuth);
  f.d0 = f.d1 = f.cone_normal;
  if (const JointConnection* c = corner_at(portion, element, 0)) f.d0 = normalized(el.p0 - sk.sphere(c->sphere).center);
  if (const JointConnection* c = corner_at(portion, element, 1)) f.d1 = normalized(el.p1 - sk.sphere(c->sphere).center);
  const Bone& b = sk.bone(el.bone);
  const Vec3 gen = (sk.sphere(b.end).center - sk.sphere(b.start).center) +
                   f.cone_normal * (sk.sphere(b.end).radius - sk.sphere(b.start).radius);
  f.plane_normal = normalized(cross(gen, f.cone_normal));
  const Vec3 g = f.e1 - f.e0;
  const double den = dot(cross(f.d0, f.d1), f.plane_normal);
  if (norm(cross(f.d0, f.d1)) < kEpsParallel || std::abs(den) < kEpsParallel) return f;
  const double s0 = dot(cross(g, f.d1), f.plane_normal) / den;
  const double s1 = dot(cross(g, f.d0), f.plane_normal) / den;
  if ((s0 > 0.0) != (s1 > 0.0) || s0 == 0.0 || s1 == 0.0) return f;
  f.s0 = s0;
  f.s1 = s1;
  f.parallel = false;
  return f;
}

DirectionSample direction_at(const Skeleton& sk, const BaselinePortion& portion, double s) {
  const auto [e, u] = portion.locate(s);
  const BaselineElement& el = portion.elements[static_cast<std::size_t>(e)];
  DirectionSample out;
  out.base = el.at(u);
  if (el.kind == ElementKind::kArc) {
    out.dir = normalized(out.base - sk.sphere(el.sphere).center);
    out.surface_normal = out.dir;
    return out;
  }
  const SegmentField f = segment_field(sk, portion, e);
  out.dir = f.direction(u);
  out.surface_normal = f.cone_normal;
  return out;
}

EncodedPoint project_point(const Skeleton& sk, int bone, const Vec3& p, std::uint64_t index) {
  if (bone < 0 || bone >= sk.bone_count()) throw Error(ErrorCode::kOutOfRange, "registration bone out of range");
  if (!is_finite(p)) throw Error(ErrorCode::kOutOfRange, "non-finite point");
  int b = choose_bone(sk, bone, p);
  std::uint32_t flags = 0;
  std::uint32_t reason = kFlagApexRegion;
  Hit hit;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const BoneProjection pr = sk.project(b, p);
    const double az = pr.on_axis ? 0.0 : pr.azimuth;
    if (pr.on_axis) flags |= kFlagAxisDegenerate;
    int cap_end = -1;
    int next = -1;
    SegmentStatus st = SegmentStatus::kApex;
    if (pr.region == BoneRegion::kCone) {
      st = try_segment(sk, b, az, p, hit);
      if (st == SegmentStatus::kHit) return finalize(sk, hit, p, index, flags);
      if (st == SegmentStatus::kApex) break;
      const int e = st == SegmentStatus::kBeyondStart ? 0 : 1;
      const JointConnection& c = hit.portion.ends[e];
      if (c.kind == JointKind::kCorner) {
        next = c.other_bone;
      } else {
        cap_end = e;
      }
    } else {
      cap_end = pr.region == BoneRegion::kStartCap ? 0 : 1;
    }
    if (cap_end >= 0) {
      if (try_cap(sk, b, cap_end, p, hit)) return finalize(sk, hit, p, index, flags);
      if (pr.region != BoneRegion::kCone) {
        st = try_segment(sk, b, az, p, hit);
        if (st == SegmentStatus::kHit) return finalize(sk, hit, p, index, flags);
        if (st == SegmentStatus::kApex) break;
        const JointConnection& c = hit.portion.ends[st == SegmentStatus::kBeyondStart ? 0 : 1];
        if (c.kind != JointKind::kFree) next = c.other_bone;
      } else if (hit.portion.ends[cap_end].kind != JointKind::kFree) {
        next = hit.portion.ends[cap_end].other_bone;
      }
    }
    if (next < 0) {
      reason = 0;
      break;
    }
    b = next;
  }
  return rigid_encode(sk, b, p, index, flags | reason);
}

EncodeResult encode_cloud(const Skeleton& sk, const Registration& registration, const std::vector<Vec3>& points,
                          unsigned threads) {
  if (registration.bone.size() != points.size()) {
    throw Error(ErrorCode::kOutOfRange, "registration does not cover all points");
  }
  EncodeResult out;
  out.points.resize(points.size());
  std::mutex mu;
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<PointIssue> local;
    for (std::size_t i = begin; i < end; ++i) {
      const int b = registration.bone[i];
      try {
        out.points[i] = project_point(sk, b, points[i], i);
        if (out.points[i].rigid()) {
          local.push_back({i, ErrorCode::kApexRegion, "point stored rigidly with its bone"});
        }
      } catch (const Error& e) {
        local.push_back({i, e.code(), e.what()});
        const int safe = std::clamp(b, 0, sk.bone_count() - 1);
        out.points[i] = rigid_encode(sk, safe, is_finite(points[i]) ? points[i] : Vec3{}, i, kFlagApexRegion);
      }
    }
    if (!local.empty()) {
      std::lock_guard<std::mutex> lock(mu);
      out.issues.insert(out.issues.end(), local.begin(), local.end());
    }
  });
  std::sort(out.issues.begin(), out.issues.end(),
            [](const PointIssue& a, const PointIssue& b) { return a.point_index < b.point_index; });
  return out;
}

Vec3 decode_rest(const Skeleton& sk, const EncodedPoint& e) {
  const auto bi = sk.bone_index(static_cast<int>(e.bone_id));
  if (!bi) throw Error(ErrorCode::kSkeletonMismatch, "encoded bone id not in skeleton");
  if (e.rigid()) return rigid_position(sk, *bi, e.azimuth, e.t, e.h);
  const BaselinePortion portion = build_portion(sk, *bi, e.azimuth);
  const double s = portion.arclength_from_section(static_cast<int>(e.section), e.t);
  const DirectionSample d = direction_at(sk, portion, s);
  return d.base + d.dir * e.h;
}

}  // namespace bskin
