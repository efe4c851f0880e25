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

#include "bskin/sphere_mesh.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bskin/error.hpp"
#include "json.hpp"

namespace bskin {

using nlohmann::json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNestedSpheres: return "NestedSpheres";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInvalidJointRef: return "InvalidJointRef";
    case ErrorCode::kInvalidSkeleton: return "InvalidSkeleton";
    case ErrorCode::kDegenerateBone: return "DegenerateBone";
    case ErrorCode::kTangentPlane: return "TangentPlane";
    case ErrorCode::kWrongCell: return "WrongCell";
    case ErrorCode::kApexRegion: return "ApexRegion";
    case ErrorCode::kAxisDegenerate: return "AxisDegenerate";
    case ErrorCode::kSheafDegenerate: return "SheafDegenerate";
    case ErrorCode::kSectionCollapsed: return "SectionCollapsed";
    case ErrorCode::kNearTangent: return "NearTangent";
    case ErrorCode::kEmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::kNonRigidTransform: return "NonRigidTransform";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSkeletonMismatch: return "SkeletonMismatch";
  }
  return "Unknown";
}

Tolerances Tolerances::for_diagonal(double diag) {
  Tolerances t;
  t.scene_diagonal = diag;
  t.eps_coplanar = 1e-7 * diag;
  t.eps_tan = 1e-7 * diag;
  t.eps_r = 1e-9 * diag;
  t.eps_surf = 1e-7 * diag;
  return t;
}

ConeGeometry derive_cone(const SphereNode& s1, const SphereNode& s2, double eps_r) {
  const Vec3 d = s2.center - s1.center;
  const double l = norm(d);
  const double dr = s1.radius - s2.radius;
  if (!(l > std::abs(dr) + eps_r)) {
    throw Error(ErrorCode::kNestedSpheres, "spheres " + std::to_string(s1.id) + " and " +
                                               std::to_string(s2.id) + " are nested");
  }
  ConeGeometry c;
  c.axis_dir = d / l;
  if (std::abs(dr) <= eps_r) {
    c.sin_alpha = 0.0;
    c.cos_alpha = 1.0;
    c.half_angle = 0.0;
    c.apex_h = {c.axis_dir, 0.0};
  } else {
    c.sin_alpha = dr / l;
    c.cos_alpha = std::sqrt(std::max(0.0, 1.0 - c.sin_alpha * c.sin_alpha));
    c.half_angle = std::asin(c.sin_alpha);
    // External homothety center of the two spheres.
    c.apex_h = {s2.center * s1.radius - s1.center * s2.radius, dr};
    c.apex = c.apex_h.point();
  }
  c.tangency_start = {s1.center + c.axis_dir * (s1.radius * c.sin_alpha), s1.radius * c.cos_alpha, c.axis_dir};
  c.tangency_end = {s2.center + c.axis_dir * (s2.radius * c.sin_alpha), s2.radius * c.cos_alpha, c.axis_dir};
  return c;
}

namespace {

double bbox_diagonal(const std::vector<SphereNode>& spheres) {
  if (spheres.empty()) return 1.0;
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi = -lo;
  for (const auto& s : spheres) {
    lo = {std::min(lo.x, s.center.x - s.radius), std::min(lo.y, s.center.y - s.radius),
          std::min(lo.z, s.center.z - s.radius)};
    hi = {std::max(hi.x, s.center.x + s.radius), std::max(hi.y, s.center.y + s.radius),
          std::max(hi.z, s.center.z + s.radius)};
  }
  return norm(hi - lo);
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidSkeleton, msg); }

}  // namespace

Skeleton Skeleton::build(std::vector<SphereNode> spheres, std::vector<std::pair<int, int>> bone_ends,
                         std::vector<int> bone_ids, std::vector<std::vector<int>> chains) {
  Skeleton sk;
  if (spheres.empty()) invalid("skeleton has no spheres");
  if (bone_ends.size() != bone_ids.size()) invalid("bone id/end count mismatch");
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const auto& s = spheres[i];
    if (!(s.radius > 0.0) || !is_finite(s.center)) invalid("sphere " + std::to_string(s.id) + " is invalid");
    if (!sk.sphere_ids_.emplace(s.id, static_cast<int>(i)).second) {
      invalid("duplicate sphere id " + std::to_string(s.id));
    }
  }
  sk.spheres_ = std::move(spheres);
  sk.sphere_bones_.assign(sk.spheres_.size(), {});
  for (std::size_t i = 0; i < bone_ends.size(); ++i) {
    Bone b;
    b.id = bone_ids[i];
    auto s0 = sk.sphere_index(bone_ends[i].first);
    auto s1 = sk.sphere_index(bone_ends[i].second);
    if (!s0 || !s1) invalid("bone " + std::to_string(b.id) + " references an unknown sphere");
    if (*s0 == *s1) invalid("bone " + std::to_string(b.id) + " starts and ends on the same sphere");
    b.start = *s0;
    b.end = *s1;
    if (!sk.bone_ids_.emplace(b.id, static_cast<int>(i)).second) {
      invalid("duplicate bone id " + std::to_string(b.id));
    }
    sk.sphere_bones_[static_cast<std::size_t>(b.start)].push_back(static_cast<int>(i));
    sk.sphere_bones_[static_cast<std::size_t>(b.end)].push_back(static_cast<int>(i));
    sk.bones_.push_back(b);
  }
  if (sk.bones_.empty()) invalid("skeleton has no bones");
  if (sk.bones_.size() + 1 != sk.spheres_.size()) invalid("skeleton is not a tree (|bones| != |spheres| - 1)");

  // Chains: bone ids -> indices, validated as simple paths.
  std::vector<int> chain_of(sk.bones_.size(), -1);
  for (const auto& chain_ids : chains) {
    if (chain_ids.empty()) invalid("empty chain");
    std::vector<int> chain;
    for (int id : chain_ids) {
      auto bi = sk.bone_index(id);
      if (!bi) invalid("chain references unknown bone " + std::to_string(id));
      if (chain_of[static_cast<std::size_t>(*bi)] != -1) invalid("bone " + std::to_string(id) + " is in two chains");
      chain_of[static_cast<std::size_t>(*bi)] = static_cast<int>(sk.chains_.size());
      chain.push_back(*bi);
    }
    std::set<int> visited;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      const Bone& a = sk.bones_[static_cast<std::size_t>(chain[k])];
      const Bone& b = sk.bones_[static_cast<std::size_t>(chain[k + 1])];
      int shared = -1;
      if (a.start == b.start || a.start == b.end) shared = a.start;
      if (a.end == b.start || a.end == b.end) shared = a.end;
      if (shared < 0) invalid("consecutive chain bones do not share a sphere");
      if (!visited.insert(shared).second) invalid("chain is not a simple path");
    }
    sk.chains_.push_back(std::move(chain));
  }
  for (std::size_t i = 0; i < sk.bones_.size(); ++i) {
    if (chain_of[i] == -1) {
      chain_of[i] = static_cast<int>(sk.chains_.size());
      sk.chains_.push_back({static_cast<int>(i)});
    }
    sk.bones_[i].chain = chain_of[i];
  }

  // Root sphere: free end of the first chain's first bone.
  {
    const auto& c0 = sk.chains_.front();
    const Bone& b0 = sk.bones_[static_cast<std::size_t>(c0.front())];
    sk.root_sphere_ = b0.start;
    if (c0.size() > 1) {
      const Bone& b1 = sk.bones_[static_cast<std::size_t>(c0[1])];
      if (b0.start == b1.start || b0.start == b1.end) sk.root_sphere_ = b0.end;
    }
  }

  // Breadth-first tree order from the root sphere.
  std::vector<char> seen_sphere(sk.spheres_.size(), 0);
  std::vector<char> seen_bone(sk.bones_.size(), 0);
  std::deque<std::pair<int, int>> queue;  // (sphere, parent bone)
  queue.emplace_back(sk.root_sphere_, -1);
  seen_sphere[static_cast<std::size_t>(sk.root_sphere_)] = 1;
  while (!queue.empty()) {
    auto [s, parent] = queue.front();
    queue.pop_front();
    for (int bi : sk.sphere_bones_[static_cast<std::size_t>(s)]) {
      if (seen_bone[static_cast<std::size_t>(bi)]) continue;
      seen_bone[static_cast<std::size_t>(bi)] = 1;
      Bone& b = sk.bones_[static_cast<std::size_t>(bi)];
      b.parent = parent;
      b.start_is_proximal = (b.start == s);
      const int other = b.distal_sphere();
      if (seen_sphere[static_cast<std::size_t>(other)]) invalid("skeleton contains a cycle");
      seen_sphere[static_cast<std::size_t>(other)] = 1;
      sk.order_.push_back(bi);
      queue.emplace_back(other, bi);
    }
  }
  if (sk.order_.size() != sk.bones_.size()) invalid("skeleton is not connected");

  for (std::size_t s = 0; s < sk.spheres_.size(); ++s) {
    if (sk.sphere_bones_[s].size() >= 3) sk.junctions_.push_back(static_cast<int>(s));
  }
  sk.tol_ = Tolerances::for_diagonal(bbox_diagonal(sk.spheres_));
  sk.derive();
  for (auto& b : sk.bones_) b.frame_ref = any_orthogonal(b.cone.axis_dir);
  return sk;
}

void Skeleton::derive() {
  for (auto& b : bones_) {
    const auto& s1 = spheres_[static_cast<std::size_t>(b.start)];
    const auto& s2 = spheres_[static_cast<std::size_t>(b.end)];
    b.cone = derive_cone(s1, s2, tol_.eps_r);
    b.length = distance(s1.center, s2.center);
  }
}

std::optional<int> Skeleton::sphere_index(int id) const {
  auto it = sphere_ids_.find(id);
  if (it == sphere_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Skeleton::bone_index(int id) const {
  auto it = bone_ids_.find(id);
  if (it == bone_ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Skeleton::neighbors(int bone, int sphere) const {
  std::vector<int> out;
  for (int b : bones_at(sphere)) {
    if (b != bone) out.push_back(b);
  }
  return out;
}

Vec3 Skeleton::azimuth_dir(int bone, double azimuth) const {
  const Bone& b = this->bone(bone);
  const Vec3 side = cross(b.cone.axis_dir, b.frame_ref);
  // Consecutive queries usually share the azimuth.
  thread_local double last = std::numeric_limits<double>::quiet_NaN();
  thread_local double c = 1.0;
  thread_local double s = 0.0;
  if (azimuth != last) {
    c = std::cos(azimuth);
    s = std::sin(azimuth);
    last = azimuth;
  }
  return b.frame_ref * c + side * s;
}

Vec3 Skeleton::cone_normal(int bone, double azimuth) const {
  const Bone& b = this->bone(bone);
  return azimuth_dir(bone, azimuth) * b.cone.cos_alpha + b.cone.axis_dir * b.cone.sin_alpha;
}

Vec3 Skeleton::tangency_point(int bone, int end_index, double azimuth) const {
  const Bone& b = this->bone(bone);
  const SphereNode& s = sphere(b.sphere_at(end_index));
  return s.center + cone_normal(bone, azimuth) * s.radius;
}

Vec3 Skeleton::generatrix_point(int bone, double azimuth, double lambda) const {
  return lerp(tangency_point(bone, 0, azimuth), tangency_point(bone, 1, azimuth), lambda);
}

double Skeleton::azimuth_of(int bone, const Vec3& p) const {
  const Bone& b = this->bone(bone);
  const Vec3 v = p - sphere(b.start).center;
  const Vec3 side = cross(b.cone.axis_dir, b.frame_ref);
  const double y = dot(v, side), x = dot(v, b.frame_ref);
  if (x == 0.0 && y == 0.0) return 0.0;
  return wrap_two_pi(std::atan2(y, x));
}

double Skeleton::axial_of(int bone, const Vec3& p) const {
  const Bone& b = this->bone(bone);
  const Vec3 v = p - sphere(b.start).center;
  const double x = dot(v, b.cone.axis_dir);
  const double y = norm(v - b.cone.axis_dir * x);
  return x - y * (b.cone.sin_alpha / b.cone.cos_alpha);
}

double Skeleton::radius_at(int bone, double rho) const {
  const Bone& b = this->bone(bone);
  return (1.0 - rho) * sphere(b.start).radius + rho * sphere(b.end).radius;
}

double radius_at(const Skeleton& sk, int bone, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::kOutOfRange, "rho outside [0,1]");
  return sk.radius_at(bone, rho);
}

BoneProjection Skeleton::project(int bone, const Vec3& p) const {
  const Bone& b = this->bone(bone);
  const SphereNode& s1 = sphere(b.start);
  const SphereNode& s2 = sphere(b.end);
  const Vec3 u = b.cone.axis_dir;
  const Vec3 v = p - s1.center;
  const double x = dot(v, u);
  const Vec3 radial = v - u * x;
  const double y = norm(radial);
  BoneProjection out;
  out.azimuth = azimuth_of(bone, p);
  out.on_axis = y <= tol_.eps_r;
  const double s = x - y * (b.cone.sin_alpha / b.cone.cos_alpha);
  if (s < 0.0 || s > b.length) {
    const SphereNode& cap = s < 0.0 ? s1 : s2;
    out.region = s < 0.0 ? BoneRegion::kStartCap : BoneRegion::kEndCap;
    Vec3 dir = p - cap.center;
    const double dn = norm(dir);
    dir = dn > 0.0 ? dir / dn : (s < 0.0 ? -u : u);
    out.point = cap.center + dir * cap.radius;
    out.normal = dir;
    out.signed_distance = dn - cap.radius;
    out.lambda = s < 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.region = BoneRegion::kCone;
  out.lambda = s / b.length;
  const Vec3 n = cone_normal(bone, out.azimuth);
  const double r = radius_at(bone, out.lambda);
  out.point = s1.center + u * s + n * r;
  out.normal = n;
  out.signed_distance = y / b.cone.cos_alpha - r;
  return out;
}

double Skeleton::signed_distance(int bone, const Vec3& p) const { return project(bone, p).signed_distance; }

double Skeleton::surface_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::max();
  for (int b = 0; b < bone_count(); ++b) best = std::min(best, signed_distance(b, p));
  return best;
}

std::uint64_t Skeleton::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& s : spheres_) {
    mix(&s.id, sizeof s.id);
    mix(&s.center.x, sizeof(double));
    mix(&s.center.y, sizeof(double));
    mix(&s.center.z, sizeof(double));
    mix(&s.radius, sizeof s.radius);
  }
  for (const auto& b : bones_) {
    mix(&b.id, sizeof b.id);
    mix(&b.start, sizeof b.start);
    mix(&b.end, sizeof b.end);
  }
  return h;
}

Registration register_closest(const Skeleton& sk, const std::vector<Vec3>& points) {
  Registration reg;
  reg.bone.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::max();
    int arg = 0;
    for (int b = 0; b < sk.bone_count(); ++b) {
      const double d = sk.signed_distance(b, points[i]);
      if (d < best) {
        best = d;
        arg = b;
      }
    }
    reg.bone[i] = arg;
  }
  return reg;
}

bool Pose::is_identity() const {
  for (const auto& b : bends) {
    if (b.angle != 0.0) return false;
  }
  for (const auto& [id, t] : twists) {
    if (t != 0.0) return false;
  }
  for (const auto& [id, s] : sphere_scales) {
    if (s != 1.0) return false;
  }
  for (const auto& [id, s] : bone_length_scales) {
    if (s != 1.0) return false;
  }
  return true;
}

Skeleton apply_pose(const Skeleton& sk, const Pose& pose) {
  // Validate references up front.
  std::vector<std::vector<const Bend*>> bends_at(static_cast<std::size_t>(sk.sphere_count()));
  for (const auto& bend : pose.bends) {
    auto s = sk.sphere_index(bend.joint_sphere_id);
    if (!s) throw Error(ErrorCode::kInvalidJointRef, "unknown joint sphere " + std::to_string(bend.joint_sphere_id));
    if (bend.bone_id && !sk.bone_index(*bend.bone_id)) {
      throw Error(ErrorCode::kInvalidJointRef, "unknown bone " + std::to_string(*bend.bone_id));
    }
    if (!(norm(bend.axis) > 0.0) || !std::isfinite(bend.angle)) {
      throw Error(ErrorCode::kInvalidJointRef, "bend at sphere " + std::to_string(bend.joint_sphere_id) +
                                                   " has an invalid axis or angle");
    }
    bends_at[static_cast<std::size_t>(*s)].push_back(&bend);
  }
  std::vector<double> twist(static_cast<std::size_t>(sk.bone_count()), 0.0);
  for (const auto& [id, t] : pose.twists) {
    auto b = sk.bone_index(id);
    if (!b) throw Error(ErrorCode::kInvalidJointRef, "unknown twisted bone " + std::to_string(id));
    twist[static_cast<std::size_t>(*b)] = t;
  }
  std::vector<double> radius_scale(static_cast<std::size_t>(sk.sphere_count()), 1.0);
  for (const auto& [id, s] : pose.sphere_scales) {
    auto i = sk.sphere_index(id);
    if (!i) throw Error(ErrorCode::kInvalidJointRef, "unknown scaled sphere " + std::to_string(id));
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidJointRef, "sphere scale must be positive");
    radius_scale[static_cast<std::size_t>(*i)] = s;
  }
  std::vector<double> length_scale(static_cast<std::size_t>(sk.bone_count()), 1.0);
  for (const auto& [id, s] : pose.bone_length_scales) {
    auto i = sk.bone_index(id);
    if (!i) throw Error(ErrorCode::kInvalidJointRef, "unknown scaled bone " + std::to_string(id));
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidJointRef, "bone length scale must be positive");
    length_scale[static_cast<std::size_t>(*i)] = s;
  }

  Skeleton out = sk;
  if (pose.is_identity()) return out;

  for (std::size_t i = 0; i < out.spheres_.size(); ++i) out.spheres_[i].radius *= radius_scale[i];

  // Forward kinematics from the root sphere; `carried[s]` is the rotation
  // applied to everything hanging below sphere s.
  std::vector<Mat3> carried(out.spheres_.size());
  for (int bi : sk.order_) {
    const Bone& rest = sk.bone(bi);
    Bone& b = out.bones_[static_cast<std::size_t>(bi)];
    const int prox = rest.proximal_sphere();
    const int dist = rest.distal_sphere();
    Mat3 rot = carried[static_cast<std::size_t>(prox)];
    for (const Bend* bend : bends_at[static_cast<std::size_t>(prox)]) {
      if (bend->bone_id && *sk.bone_index(*bend->bone_id) != bi) continue;
      rot = rot * Mat3::rotation(normalized(bend->axis), bend->angle);
    }
    const Vec3 rest_vec = (sk.sphere(dist).center - sk.sphere(prox).center) * length_scale[static_cast<std::size_t>(bi)];
    out.spheres_[static_cast<std::size_t>(dist)].center = out.spheres_[static_cast<std::size_t>(prox)].center + rot * rest_vec;
    b.rotation = rot;
    b.twist = twist[static_cast<std::size_t>(bi)];
    carried[static_cast<std::size_t>(dist)] = rot * Mat3::rotation(rest.cone.axis_dir, b.twist);
  }
  out.derive();
  for (std::size_t i = 0; i < out.bones_.size(); ++i) {
    Bone& b = out.bones_[i];
    const Vec3 ref = b.rotation * sk.bones_[i].frame_ref;
    b.frame_ref = normalized(ref - b.cone.axis_dir * dot(ref, b.cone.axis_dir));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kParseError, "expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SkeletonFile parse_skeleton_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("skeleton JSON: ") + e.what());
  }
  try {
    std::vector<SphereNode> spheres;
    for (const auto& s : j.at("spheres")) {
      spheres.push_back({s.at("id").get<int>(), vec_from(s.at("center")), s.at("radius").get<double>()});
    }
    std::vector<std::pair<int, int>> ends;
    std::vector<int> ids;
    for (const auto& b : j.at("bones")) {
      ids.push_back(b.at("id").get<int>());
      ends.emplace_back(b.at("start").get<int>(), b.at("end").get<int>());
    }
    std::vector<std::vector<int>> chains;
    if (j.contains("chains")) chains = j.at("chains").get<std::vector<std::vector<int>>>();
    SkeletonFile out{Skeleton::build(std::move(spheres), std::move(ends), std::move(ids), std::move(chains)), {}};
    if (j.contains("registration") && !j.at("registration").is_null()) {
      Registration reg;
      for (const auto& id : j.at("registration")) {
        auto bi = out.skeleton.bone_index(id.get<int>());
        if (!bi) throw Error(ErrorCode::kInvalidSkeleton, "registration references unknown bone");
        reg.bone.push_back(*bi);
      }
      out.registration = std::move(reg);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("skeleton JSON: ") + e.what());
  }
}

std::string skeleton_to_json(const Skeleton& sk) {
  json j;
  j["version"] = 1;
  j["spheres"] = json::array();
  for (const auto& s : sk.spheres()) {
    j["spheres"].push_back({{"id", s.id}, {"center", vec_to(s.center)}, {"radius", s.radius}});
  }
  j["bones"] = json::array();
  for (const auto& b : sk.bones()) {
    j["bones"].push_back({{"id", b.id}, {"start", sk.sphere(b.start).id}, {"end", sk.sphere(b.end).id}});
  }
  j["chains"] = json::array();
  for (const auto& c : sk.chains()) {
    json ids = json::array();
    for (int bi : c) ids.push_back(sk.bone(bi).id);
    j["chains"].push_back(ids);
  }
  return j.dump();
}

SkeletonFile load_skeleton(const std::string& path) { return parse_skeleton_json(read_file(path)); }

Pose parse_pose_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pose JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "pose JSON must be an object");
  try {
    Pose pose;
    if (j.contains("bends")) {
      for (const auto& b : j.at("bends")) {
        Bend bend;
        bend.joint_sphere_id = b.at("joint_sphere_id").get<int>();
        if (b.contains("bone_id")) bend.bone_id = b.at("bone_id").get<int>();
        bend.axis = vec_from(b.at("axis"));
        bend.angle = b.at("angle_rad").get<double>();
        pose.bends.push_back(bend);
      }
    }
    if (j.contains("twists")) {
      for (const auto& t : j.at("twists")) pose.twists[t.at("bone_id").get<int>()] = t.at("angle_rad").get<double>();
    }
    if (j.contains("anatomy")) {
      const auto& a = j.at("anatomy");
      if (a.contains("sphere_scales")) {
        for (const auto& [k, v] : a.at("sphere_scales").items()) pose.sphere_scales[std::stoi(k)] = v.get<double>();
      }
      if (a.contains("bone_length_scales")) {
        for (const auto& [k, v] : a.at("bone_length_scales").items()) {
          pose.bone_length_scales[std::stoi(k)] = v.get<double>();
        }
      }
    }
    return pose;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pose JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kParseError, "pose JSON: anatomy keys must be integer ids");
  }
}

std::string pose_to_json(const Pose& pose) {
  json j;
  j["version"] = 1;
  j["bends"] = json::array();
  for (const auto& b : pose.bends) {
    json e{{"joint_sphere_id", b.joint_sphere_id}, {"axis", vec_to(b.axis)}, {"angle_rad", b.angle}};
    if (b.bone_id) e["bone_id"] = *b.bone_id;
    j["bends"].push_back(e);
  }
  j["twists"] = json::array();
  for (const auto& [id, t] : pose.twists) j["twists"].push_back({{"bone_id", id}, {"angle_rad", t}});
  json ss = json::object(), ls = json::object();
  for (const auto& [id, s] : pose.sphere_scales) ss[std::to_string(id)] = s;
  for (const auto& [id, s] : pose.bone_length_scales) ls[std::to_string(id)] = s;
  j["anatomy"] = {{"sphere_scales", ss}, {"bone_length_scales", ls}};
  return j.dump();
}

Pose load_pose(const std::string& path) { return parse_pose_json(read_file(path)); }

}  // namespace bskin
