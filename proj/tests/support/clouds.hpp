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

// Deterministic synthetic clouds around a sphere-mesh.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bskin/sphere_mesh.hpp"

namespace bskin::clouds {

struct Cloud {
  std::vector<Vec3> points;
  Registration registration;
};

/// `n` points around the bones: uniform bone, axial position and azimuth,
/// radial distance radius * (1 + detail), detail in [-amplitude, amplitude]
/// following a smooth pattern plus noise.
inline Cloud around_bones(const Skeleton& sk, std::size_t n, double amplitude = 0.08, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, sk.bone_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Cloud c;
  c.points.reserve(n);
  c.registration.bone.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int b = pick(rng);
    const Bone& bone = sk.bone(b);
    const double rho = unit(rng);
    const double az = kTwoPi * unit(rng);
    const double pattern = 0.5 * std::sin(5.0 * az + 7.0 * rho) + 0.5 * (2.0 * unit(rng) - 1.0);
    const Vec3 center = lerp(sk.sphere(bone.start).center, sk.sphere(bone.end).center, rho);
    const double r = radius_at(sk, b, rho) * (1.0 + amplitude * pattern);
    c.points.push_back(center + sk.azimuth_dir(b, az) * r);
    c.registration.bone.push_back(b);
  }
  return c;
}

/// Points at signed distance `h` from the sphere-mesh surface: samples of
/// the cones and spheres pushed along the surface normal, keeping only those
/// whose distance to the union is h.
inline Cloud offset_surface(const Skeleton& sk, std::size_t n, double h, std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, sk.bone_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Cloud c;
  const double tol = 1e-9 * sk.tol().scene_diagonal;
  std::size_t guard = 0;
  while (c.points.size() < n && guard++ < 100 * n) {
    const int b = pick(rng);
    const double az = kTwoPi * unit(rng);
    const double lambda = unit(rng);
    Vec3 p;
    if (unit(rng) < 0.3) {
      // Sphere sample.
      const SphereNode& s = sk.sphere(lambda < 0.5 ? sk.bone(b).start : sk.bone(b).end);
      const double z = 2.0 * unit(rng) - 1.0;
      const double q = std::sqrt(std::max(0.0, 1.0 - z * z));
      p = s.center + Vec3{q * std::cos(az), q * std::sin(az), z} * (s.radius + h);
    } else {
      p = sk.generatrix_point(b, az, lambda) + sk.cone_normal(b, az) * h;
    }
    if (std::abs(sk.surface_distance(p) - h) > tol) continue;
    c.points.push_back(p);
    c.registration.bone.push_back(b);
  }
  return c;
}

}  // namespace bskin::clouds
