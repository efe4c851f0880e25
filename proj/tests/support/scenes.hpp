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

// Synthetic skeletons shared by the unit tests, acceptance suite and
// benchmarks.

#pragma once

#include <cmath>
#include <vector>

#include "bskin/sphere_mesh.hpp"

namespace bskin::scenes {

struct Node {
  Vec3 c;
  double r;
};

/// Single chain through `nodes`; sphere ids 0.., bone i joins i and i+1.
inline Skeleton chain(const std::vector<Node>& nodes) {
  std::vector<SphereNode> spheres;
  std::vector<std::pair<int, int>> ends;
  std::vector<int> ids;
  std::vector<int> chain_ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    spheres.push_back({static_cast<int>(i), nodes[i].c, nodes[i].r});
    if (i > 0) {
      ends.emplace_back(static_cast<int>(i) - 1, static_cast<int>(i));
      ids.push_back(static_cast<int>(i) - 1);
      chain_ids.push_back(static_cast<int>(i) - 1);
    }
  }
  return Skeleton::build(spheres, ends, ids, {chain_ids});
}

/// Two bones of length `len` along +x, the second turned by `bend_deg` in the
/// xy-plane (positive towards +y).
inline Skeleton two_bone(double bend_deg, double r0 = 0.3, double r1 = 0.3, double r2 = 0.3, double len = 2.0) {
  const double a = bend_deg * 3.14159265358979323846 / 180.0;
  return chain({{{0, 0, 0}, r0}, {{len, 0, 0}, r1}, {{len + len * std::cos(a), len * std::sin(a), 0}, r2}});
}

/// Three collinear bones along +x with tapered radii.
inline Skeleton three_bone_stripe() {
  return chain({{{0, 0, 0}, 0.35}, {{2, 0, 0}, 0.3}, {{4, 0, 0}, 0.28}, {{6, 0, 0}, 0.22}});
}

/// Junction of three arms meeting at sphere 0.
inline Skeleton tripod() {
  std::vector<SphereNode> spheres = {{0, {0, 0, 0}, 0.4},
                                     {1, {2, 0, 0}, 0.3},
                                     {2, {-1, 1.7, 0}, 0.3},
                                     {3, {-1, -1.7, 0.2}, 0.25}};
  return Skeleton::build(spheres, {{0, 1}, {0, 2}, {0, 3}}, {0, 1, 2}, {{0}, {1}, {2}});
}

/// Humanoid-like tree with 13 bones and junctions at the pelvis and chest.
inline Skeleton humanoid() {
  std::vector<SphereNode> s = {
      {0, {0, 0, 0}, 0.30},      // pelvis
      {1, {0, 0.6, 0}, 0.28},    // spine
      {2, {0, 1.2, 0}, 0.30},    // chest
      {3, {0, 1.6, 0}, 0.12},    // neck
      {4, {0, 1.9, 0}, 0.20},    // head
      {5, {0.5, 1.25, 0}, 0.12}, // right shoulder
      {6, {1.1, 1.0, 0}, 0.09},  // right elbow
      {7, {1.6, 0.8, 0}, 0.07},  // right wrist
      {8, {-0.5, 1.25, 0}, 0.12},
      {9, {-1.1, 1.0, 0}, 0.09},
      {10, {-1.6, 0.8, 0}, 0.07},
      {11, {0.2, -0.9, 0}, 0.14}, // right knee
      {12, {0.2, -1.8, 0}, 0.10}, // right ankle
      {13, {-0.2, -0.9, 0}, 0.14},
  };
  std::vector<std::pair<int, int>> ends = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {2, 5}, {5, 6}, {6, 7},
                                           {2, 8}, {8, 9}, {9, 10}, {0, 11}, {11, 12}, {0, 13}};
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(ends.size()); ++i) ids.push_back(i);
  return Skeleton::build(s, ends, ids, {{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11}, {12}});
}

}  // namespace bskin::scenes
