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

// Geometric measurements on built and deformed portions, shared by the unit
// tests and the acceptance suite.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bskin/baseline.hpp"
#include "bskin/deformer.hpp"

namespace bskin::checks {

inline double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

/// Largest gap between consecutive elements.
inline double max_gap(const DeformedPortion& dp) {
  double worst = 0.0;
  for (std::size_t i = 1; i < dp.elements.size(); ++i) {
    worst = std::max(worst, distance(dp.elements[i - 1].end(), dp.elements[i].start()));
  }
  return worst;
}

/// Largest distance of curve and arc samples to their posed surface.
inline double max_off_surface(const Skeleton& posed, const DeformedPortion& dp, int samples = 65) {
  double worst = 0.0;
  for (const DeformedElement& el : dp.elements) {
    if (el.kind == DeformedKind::kConnector) continue;
    for (int i = 0; i < samples; ++i) {
      const Vec3 p = el.at(static_cast<double>(i) / (samples - 1));
      double d;
      if (el.kind == DeformedKind::kCurve) {
        d = std::abs(posed.signed_distance(el.curve.bone(), p));
      } else {
        const SphereNode& s = posed.sphere(el.sphere);
        d = std::abs(distance(p, s.center) - s.radius);
      }
      worst = std::max(worst, d);
    }
  }
  return worst;
}

/// Largest distance of the anchors to the separator planes of their joints.
inline double max_anchor_offset(const Skeleton& posed, const BaselinePortion& rest, const DeformedPortion& dp) {
  double worst = 0.0;
  std::size_t a = 0;
  for (const JointConnection& c : rest.ends) {
    if (c.kind == JointKind::kFree) continue;
    const Plane sep = separator_plane(posed, rest.bone, c.other_bone, c.sphere).plane;
    worst = std::max(worst, std::abs(sep.signed_distance(dp.anchors[a++].position)));
  }
  return worst;
}

/// Largest tangent turn at element junctions involving an arc (the joints
/// that are meant to be smooth).
inline double max_arc_tangent_jump(const DeformedPortion& dp) {
  double worst = 0.0;
  for (std::size_t i = 1; i < dp.elements.size(); ++i) {
    const DeformedElement& a = dp.elements[i - 1];
    const DeformedElement& b = dp.elements[i];
    if (a.kind == DeformedKind::kConnector || b.kind == DeformedKind::kConnector) continue;
    if (a.kind != DeformedKind::kArc && b.kind != DeformedKind::kArc) continue;
    if (a.length() <= 0.0 || b.length() <= 0.0) continue;
    worst = std::max(worst, angle_between(a.tangent(1.0), b.tangent(0.0)));
  }
  return worst;
}

inline double max_arc_tangent_jump(const BaselinePortion& p) {
  double worst = 0.0;
  for (std::size_t i = 1; i < p.elements.size(); ++i) {
    const BaselineElement& a = p.elements[i - 1];
    const BaselineElement& b = p.elements[i];
    if (a.kind != ElementKind::kArc && b.kind != ElementKind::kArc) continue;
    if (a.length() <= 0.0 || b.length() <= 0.0) continue;
    worst = std::max(worst, angle_between(a.tangent(1.0), b.tangent(0.0)));
  }
  return worst;
}

/// Minimum distance between segments [p0,p1] and [q0,q1].
inline double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  if (a <= 0.0 && e <= 0.0) return norm(r);
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return norm((p0 + d1 * s) - (q0 + d2 * t));
}

/// Whether two polylines come closer than `tol` anywhere.
inline bool polylines_touch(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol) {
  for (std::size_t i = 1; i < a.size(); ++i) {
    for (std::size_t j = 1; j < b.size(); ++j) {
      if (segment_distance(a[i - 1], a[i], b[j - 1], b[j]) < tol) return true;
    }
  }
  return false;
}

}  // namespace bskin::checks
