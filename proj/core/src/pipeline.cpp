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

#include "bskin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <unordered_map>

#include "bskin/error.hpp"
#include "bskin/parallel.hpp"
#include "json.hpp"

namespace bskin {
namespace {

using json = nlohmann::json;

Profile profile_from(const json& j, const char* key, Profile fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v == "cubic") return Profile::kCubic;
  if (v == "linear") return Profile::kLinear;
  throw Error(ErrorCode::kParseError, std::string(key) + " must be \"cubic\" or \"linear\"");
}

const char* profile_name(Profile p) { return p == Profile::kCubic ? "cubic" : "linear"; }

// Interior angle between two bones at their shared sphere.
double interior_angle(const Skeleton& sk, int a, int b, int joint) {
  auto into = [&](int bone) {
    const Bone& bb = sk.bone(bone);
    return joint == bb.start ? bb.cone.axis_dir : -bb.cone.axis_dir;
  };
  return std::acos(std::clamp(dot(into(a), into(b)), -1.0, 1.0));
}

// Traversal order of positions along a deformed portion.
bool before(std::pair<int, double> a, std::pair<int, double> b) {
  return a.first < b.first || (a.first == b.first && a.second < b.second);
}

// Index into dp.boundaries of the anchor of `end`.
int anchor_boundary(const BaselinePortion& rest, int end) {
  return end == 0 || rest.ends[0].kind == JointKind::kFree ? 1 : 2;
}

struct ZoneKey {
  int joint, a, b;
  bool operator<(const ZoneKey& o) const { return std::tie(joint, a, b) < std::tie(o.joint, o.a, o.b); }
};

struct ZoneMember {
  ZoneKey key;
  std::size_t index;
  Vec3 base;
  Vec3 dir;
  double h;
  double delta;
};

}  // namespace

SkinOptions parse_skin_options(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("options: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "options must be a JSON object");
  SkinOptions o;
  try {
    o.profile_position = profile_from(j, "profile_position", o.profile_position);
    o.profile_direction = profile_from(j, "profile_direction", o.profile_direction);
    if (j.contains("modulation")) o.modulation = j.at("modulation").get<bool>();
    if (j.contains("unfold_smoothing")) o.unfold_smoothing = j.at("unfold_smoothing").get<bool>();
    if (j.contains("fold_angle_threshold")) o.fold_angle_threshold = j.at("fold_angle_threshold").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("options: ") + e.what());
  }
  return o;
}

std::string skin_options_to_json(const SkinOptions& o) {
  json j;
  j["version"] = 1;
  j["profile_position"] = profile_name(o.profile_position);
  j["profile_direction"] = profile_name(o.profile_direction);
  j["modulation"] = o.modulation;
  j["unfold_smoothing"] = o.unfold_smoothing;
  j["fold_angle_threshold"] = o.fold_angle_threshold;
  return j.dump();
}

EncodedSet encode(const Skeleton& sk, const Registration& registration, const std::vector<Vec3>& points,
                  unsigned threads) {
  EncodeResult r = encode_cloud(sk, registration, points, threads);
  EncodedSet out;
  out.skeleton_fingerprint = sk.fingerprint();
  out.points = std::move(r.points);
  out.issues = std::move(r.issues);
  return out;
}

double modulate_height(double h, double sin_beta, double sin_beta_prime, bool* near_tangent) {
  const bool floor = !(sin_beta_prime > kEpsSin);
  if (near_tangent != nullptr) *near_tangent = floor;
  if (sin_beta == sin_beta_prime) return h;
  return h * sin_beta / (floor ? kEpsSin : sin_beta_prime);
}

// ---------------------------------------------------------------------------
// Smoothing zones

std::optional<double> SmoothingZone::delta_at(const DeformedPortion& dp, int element, double u) const {
  const int last = static_cast<int>(dp.elements.size()) - 1;
  const int other = end == 0 ? 0 : last;
  const int anchor = end == 0 ? 1 : static_cast<int>(dp.boundaries.size()) - 2;
  const std::pair<int, double> pos{element, u};
  bool inside = false;
  if (element == dp.center_element) {
    const double l = dp.elements[static_cast<std::size_t>(element)].curve.lambda_at(u);
    inside = end == 0 ? l <= lambda_center : l >= lambda_center;
  } else if (element == other) {
    const double l = dp.elements[static_cast<std::size_t>(element)].curve.lambda_at(u);
    const DeformedCurve& c = dp.elements[static_cast<std::size_t>(element)].curve;
    const double near = end == 0 ? c.lambda_b() : c.lambda_a();
    inside = near >= lambda_other ? l >= lambda_other : l <= lambda_other;
  } else {
    inside = end == 0 ? element < dp.center_element : element > dp.center_element;
  }
  if (!inside) return std::nullopt;
  // S1 side lies between the center curve and the anchor.
  const bool center_side = end == 0 ? !before(pos, dp.boundaries[static_cast<std::size_t>(anchor)])
                                    : before(pos, dp.boundaries[static_cast<std::size_t>(anchor)]);
  const Vec3 b = dp.elements[static_cast<std::size_t>(element)].at(u);
  return distance(center_side ? s1 : s2, b) / 3.0;
}

std::optional<SmoothingZone> compute_smoothing_zone(const Deformer& deformer, const BaselinePortion& rest,
                                                    const DeformedPortion& dp, int end, double fold_angle_threshold) {
  const JointConnection& c = rest.ends[end];
  if (c.kind != JointKind::kCorner || c.tangent_plane) return std::nullopt;
  if (!deformer.joint_modified(c.sphere)) return std::nullopt;
  const double before_angle = interior_angle(deformer.rest(), rest.bone, c.other_bone, c.sphere);
  const double after_angle = interior_angle(deformer.posed(), rest.bone, c.other_bone, c.sphere);
  if (!(before_angle < fold_angle_threshold) || !(after_angle >= fold_angle_threshold)) return std::nullopt;
  const int anchor = anchor_boundary(rest, end) - 1;

  SmoothingZone z;
  z.joint = c.sphere;
  z.center_bone = rest.bone;
  z.other_bone = c.other_bone;
  z.end = end;
  const BaselineElement& center = rest.elements[static_cast<std::size_t>(rest.center_element)];
  const BaselineElement& other = end == 0 ? rest.elements.front() : rest.elements.back();
  z.lambda_center = end == 0 ? center.lambda0 : center.lambda1;
  z.lambda_other = end == 0 ? other.lambda1 : other.lambda0;
  const DeformedElement& dc = dp.elements[static_cast<std::size_t>(dp.center_element)];
  const DeformedElement& dother = end == 0 ? dp.elements.front() : dp.elements.back();
  z.s1 = dc.curve.at_lambda(z.lambda_center);
  z.s2 = dother.curve.at_lambda(z.lambda_other);
  z.s_prime = dp.anchors[static_cast<std::size_t>(anchor)].position;
  return z;
}

std::vector<double> smooth_heights(const std::vector<ZoneSample>& samples) {
  std::vector<double> out(samples.size());
  double reach = 0.0;
  for (const ZoneSample& s : samples) reach = std::max(reach, 3.0 * s.delta);
  if (!(reach > 0.0)) {
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].h;
    return out;
  }
  using Cell = std::tuple<long long, long long, long long>;
  auto cell_of = [&](const Vec3& p) {
    return Cell{static_cast<long long>(std::floor(p.x / reach)), static_cast<long long>(std::floor(p.y / reach)),
                static_cast<long long>(std::floor(p.z / reach))};
  };
  std::map<Cell, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < samples.size(); ++i) grid[cell_of(samples[i].base)].push_back(i);

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ZoneSample& s = samples[i];
    const double r = 3.0 * s.delta;
    if (!(r > 0.0)) {
      out[i] = s.h;
      continue;
    }
    const auto [cx, cy, cz] = cell_of(s.base);
    const double inv = 1.0 / (2.0 * s.delta * s.delta);
    double wsum = 0.0, acc = 0.0, lo = s.h, hi = s.h;
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        for (long long dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(Cell{cx + dx, cy + dy, cz + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            const double d2 = norm2(samples[j].base - s.base);
            if (d2 > r * r) continue;
            const double w = std::exp(-d2 * inv);
            wsum += w;
            acc += w * (samples[j].h - s.h);
            lo = std::min(lo, samples[j].h);
            hi = std::max(hi, samples[j].h);
          }
        }
      }
    }
    out[i] = wsum > 0.0 ? std::clamp(s.h + acc / wsum, lo, hi) : s.h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Skinning

SkinResult skin(const SkinningJob& job) {
  if (job.skeleton == nullptr || job.encoded == nullptr) throw Error(ErrorCode::kOutOfRange, "incomplete job");
  const Skeleton& sk = *job.skeleton;
  const EncodedSet& enc = *job.encoded;
  if (enc.skeleton_fingerprint != sk.fingerprint()) {
    throw Error(ErrorCode::kSkeletonMismatch, "encoded set was produced against another skeleton");
  }
  const SkinOptions& opt = job.options;
  const Deformer deformer(sk, job.pose, DeformConfig{opt.profile_position, opt.profile_direction});

  const std::size_t n = enc.points.size();
  SkinResult out;
  out.points.resize(n);
  std::mutex mu;
  std::vector<ZoneMember> members;

  parallel_for(n, job.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<PointIssue> issues;
    std::vector<ZoneMember> local;
    for (std::size_t i = begin; i < end; ++i) {
      const EncodedPoint& ep = enc.points[i];
      const auto bi = sk.bone_index(static_cast<int>(ep.bone_id));
      if (!bi) throw Error(ErrorCode::kSkeletonMismatch, "encoded bone id not in skeleton");
      if (ep.rigid()) {
        out.points[i] = deformer.rigid_point(ep);
        issues.push_back({ep.point_index, ErrorCode::kApexRegion, "passed through rigidly"});
        continue;
      }
      if (deformer.identity()) {
        out.points[i] = decode_rest(sk, ep);
        continue;
      }
      if (deformer.rigid_neighborhood(*bi)) {
        out.points[i] = deformer.carry(*bi, decode_rest(sk, ep));
        continue;
      }
      try {
        const BaselinePortion portion = build_portion(sk, *bi, ep.azimuth);
        const DeformedPortion dp = deformer.deform_portion(portion);
        const int section = std::min(static_cast<int>(ep.section), dp.section_count() - 1);
        if (dp.section_length(section) < 1e-12) {
          issues.push_back({ep.point_index, ErrorCode::kSectionCollapsed, "posed section has no length"});
        }
        const auto [e, u] = dp.locate(section, ep.t);
        const DirectionSample d = deformer.direction_at(dp, e, u);
        double h = ep.h;
        if (opt.modulation && dp.elements[static_cast<std::size_t>(e)].kind == DeformedKind::kCurve) {
          bool near = false;
          h = modulate_height(ep.h, ep.sin_beta, std::min(1.0, d.sin_beta()), &near);
          if (near) issues.push_back({ep.point_index, ErrorCode::kNearTangent, "sin(beta') clamped"});
        }
        out.points[i] = d.base + d.dir * h;
        if (opt.unfold_smoothing) {
          for (int side = 0; side < 2; ++side) {
            if (!dp.bent[side]) continue;
            const auto zone = compute_smoothing_zone(deformer, portion, dp, side, opt.fold_angle_threshold);
            if (!zone) continue;
            const auto delta = zone->delta_at(dp, e, u);
            if (!delta) continue;
            const ZoneKey key{zone->joint, std::min(zone->center_bone, zone->other_bone),
                              std::max(zone->center_bone, zone->other_bone)};
            local.push_back({key, i, d.base, d.dir, h, *delta});
            break;
          }
        }
      } catch (const Error& err) {
        out.points[i] = deformer.carry(*bi, decode_rest(sk, ep));
        issues.push_back({ep.point_index, err.code(), err.what()});
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    out.issues.insert(out.issues.end(), issues.begin(), issues.end());
    members.insert(members.end(), local.begin(), local.end());
  });

  std::sort(out.issues.begin(), out.issues.end(),
            [](const PointIssue& a, const PointIssue& b) { return a.point_index < b.point_index; });
  if (members.empty()) return out;
  std::sort(members.begin(), members.end(), [](const ZoneMember& a, const ZoneMember& b) {
    return std::tie(a.key.joint, a.key.a, a.key.b, a.index) < std::tie(b.key.joint, b.key.a, b.key.b, b.index);
  });
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < members.size();) {
    std::size_t j = i;
    while (j < members.size() && !(members[i].key < members[j].key) && !(members[j].key < members[i].key)) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  parallel_for(groups.size(), job.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const auto [lo, hi] = groups[g];
      std::vector<ZoneSample> samples;
      samples.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) samples.push_back({members[i].base, members[i].h, members[i].delta});
      const std::vector<double> h = smooth_heights(samples);
      for (std::size_t i = lo; i < hi; ++i) {
        out.points[members[i].index] = members[i].base + members[i].dir * h[i - lo];
      }
    }
  });
  out.smoothed = members.size();
  return out;
}

SkinResult skin(const Skeleton& sk, const EncodedSet& encoded, const Pose& pose, const SkinOptions& options,
                unsigned threads) {
  SkinningJob job;
  job.skeleton = &sk;
  job.encoded = &encoded;
  job.pose = pose;
  job.options = options;
  job.threads = threads;
  return skin(job);
}

std::vector<BaselinePortion> sample_portions(const Skeleton& sk, int count) {
  if (count < 0) throw Error(ErrorCode::kOutOfRange, "baseline count must be non-negative");
  std::vector<BaselinePortion> out;
  const int nb = sk.bone_count();
  if (nb == 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int bone = i % nb;
    const int per_bone = count / nb + (bone < count % nb ? 1 : 0);
    out.push_back(build_portion(sk, bone, kTwoPi * (i / nb) / per_bone));
  }
  return out;
}

std::string posed_baselines_to_json(const Skeleton& rest, const Pose& pose, int count, double spacing) {
  if (!(spacing > 0.0)) spacing = 0.01 * rest.tol().scene_diagonal;
  const std::vector<BaselinePortion> portions = sample_portions(rest, count);
  const Deformer deformer(rest, pose);
  if (deformer.identity()) return baselines_to_json(rest, portions, spacing);
  nlohmann::json list = nlohmann::json::array();
  for (const BaselinePortion& p : portions) {
    nlohmann::json item;
    item["bone"] = rest.bone(p.bone).id;
    item["azimuth"] = p.azimuth;
    nlohmann::json pts = nlohmann::json::array();
    for (const Vec3& v : deformer.deform_portion(p).polyline(spacing)) pts.push_back({v.x, v.y, v.z});
    item["points"] = std::move(pts);
    list.push_back(std::move(item));
  }
  nlohmann::json out;
  out["version"] = 1;
  out["baselines"] = std::move(list);
  return out.dump();
}

}  // namespace bskin
