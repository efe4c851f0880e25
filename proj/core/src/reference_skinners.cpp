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

#include "bskin/reference_skinners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bskin/error.hpp"
#include "bskin/parallel.hpp"

namespace bskin {
namespace {

using Quat = std::array<double, 4>;  // w, x, y, z

Quat mul(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Quat conj(const Quat& q) { return {q[0], -q[1], -q[2], -q[3]}; }

double qdot(const Quat& a, const Quat& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

Quat from_rotation(const Mat3& r) {
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  Quat q;
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  const double n = std::sqrt(qdot(q, q));
  for (double& v : q) v /= n;
  return q;
}

Mat3 to_rotation(const Quat& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return r;
}

}  // namespace

WeightSet gaussian_weights(const Skeleton& sk, const std::vector<Vec3>& points, double sigma_factor,
                           unsigned threads) {
  if (!(sigma_factor > 0.0)) throw Error(ErrorCode::kOutOfRange, "sigma factor must be positive");
  const int nb = sk.bone_count();
  std::vector<double> sigma(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    const Bone& bone = sk.bone(b);
    sigma[static_cast<std::size_t>(b)] =
        sigma_factor * 0.5 * (sk.sphere(bone.start).radius + sk.sphere(bone.end).radius);
  }
  WeightSet out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, int>> w(static_cast<std::size_t>(nb));
    for (std::size_t i = begin; i < end; ++i) {
      for (int b = 0; b < nb; ++b) {
        const double d = std::max(0.0, sk.signed_distance(b, points[i]));
        const double s = sigma[static_cast<std::size_t>(b)];
        w[static_cast<std::size_t>(b)] = {std::exp(-d * d / (2.0 * s * s)), b};
      }
      const int keep = std::min(kMaxInfluences, nb);
      std::partial_sort(w.begin(), w.begin() + keep, w.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
      });
      PointWeights& pw = out[i];
      double sum = 0.0;
      for (int k = 0; k < keep; ++k) sum += w[static_cast<std::size_t>(k)].first;
      if (!(sum > 0.0)) {
        // Far from every bone: the nearest surface wins.
        int best = 0;
        double best_d = sk.signed_distance(0, points[i]);
        for (int b = 1; b < nb; ++b) {
          const double d = sk.signed_distance(b, points[i]);
          if (d < best_d) {
            best_d = d;
            best = b;
          }
        }
        pw.bone[0] = best;
        pw.weight[0] = 1.0;
        pw.count = 1;
        continue;
      }
      for (int k = 0; k < keep; ++k) {
        const auto& [wk, b] = w[static_cast<std::size_t>(k)];
        if (wk <= 0.0) break;
        pw.bone[static_cast<std::size_t>(pw.count)] = b;
        pw.weight[static_cast<std::size_t>(pw.count)] = wk / sum;
        ++pw.count;
      }
    }
  });
  return out;
}

bool BoneTransform::rigid(double tol) const {
  const Mat3 g = linear.transposed() * linear;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(g(r, c) - (r == c ? 1.0 : 0.0)) > tol) return false;
    }
  }
  double det = linear(0, 0) * (linear(1, 1) * linear(2, 2) - linear(1, 2) * linear(2, 1)) -
               linear(0, 1) * (linear(1, 0) * linear(2, 2) - linear(1, 2) * linear(2, 0)) +
               linear(0, 2) * (linear(1, 0) * linear(2, 1) - linear(1, 1) * linear(2, 0));
  return det > 0.0;
}

std::vector<BoneTransform> bone_transforms(const Skeleton& rest, const Pose& pose) {
  const Skeleton posed = apply_pose(rest, pose);
  std::vector<BoneTransform> out(static_cast<std::size_t>(rest.bone_count()));
  for (int b = 0; b < rest.bone_count(); ++b) {
    const Bone& rb = rest.bone(b);
    const Bone& pb = posed.bone(b);
    Mat3 scale;
    const double ratio = rb.length > 0.0 ? pb.length / rb.length : 1.0;
    if (ratio != 1.0) {
      const Vec3& a = rb.cone.axis_dir;
      const double k = ratio - 1.0;
      scale.m = {1 + k * a.x * a.x, k * a.x * a.y,     k * a.x * a.z,
                 k * a.y * a.x,     1 + k * a.y * a.y, k * a.y * a.z,
                 k * a.z * a.x,     k * a.z * a.y,     1 + k * a.z * a.z};
    }
    BoneTransform& t = out[static_cast<std::size_t>(b)];
    t.linear = Mat3::rotation(pb.cone.axis_dir, pb.twist) * pb.rotation * scale;
    // The proximal sphere center is the bone's fixed point.
    const int s = rb.proximal_sphere();
    t.translation = posed.sphere(s).center - t.linear * rest.sphere(s).center;
  }
  return out;
}

std::vector<Vec3> lbs(const std::vector<Vec3>& points, const WeightSet& weights,
                      const std::vector<BoneTransform>& transforms, unsigned threads) {
  if (weights.size() != points.size()) throw Error(ErrorCode::kOutOfRange, "one weight set per point required");
  std::vector<Vec3> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const PointWeights& w = weights[i];
      Vec3 acc{0, 0, 0};
      for (int k = 0; k < w.count; ++k) {
        acc += transforms.at(static_cast<std::size_t>(w.bone[static_cast<std::size_t>(k)])).apply(points[i]) *
               w.weight[static_cast<std::size_t>(k)];
      }
      out[i] = acc;
    }
  });
  return out;
}

DualQuat DualQuat::from_transform(const BoneTransform& t) {
  DualQuat q;
  q.real = from_rotation(t.linear);
  const Quat tq{0.0, t.translation.x, t.translation.y, t.translation.z};
  q.dual = mul(tq, q.real);
  for (double& v : q.dual) v *= 0.5;
  return q;
}

BoneTransform DualQuat::to_transform() const {
  const double n = std::sqrt(qdot(real, real));
  Quat r = real, d = dual;
  for (int i = 0; i < 4; ++i) {
    r[static_cast<std::size_t>(i)] /= n;
    d[static_cast<std::size_t>(i)] /= n;
  }
  BoneTransform t;
  t.linear = to_rotation(r);
  const Quat tq = mul(d, conj(r));
  t.translation = {2.0 * tq[1], 2.0 * tq[2], 2.0 * tq[3]};
  return t;
}

DualQuat blend_dual_quats(const PointWeights& w, const std::vector<DualQuat>& dqs) {
  int pivot = 0;
  for (int k = 1; k < w.count; ++k) {
    if (w.weight[static_cast<std::size_t>(k)] > w.weight[static_cast<std::size_t>(pivot)]) pivot = k;
  }
  const Quat& ref = dqs.at(static_cast<std::size_t>(w.bone[static_cast<std::size_t>(pivot)])).real;
  DualQuat b;
  b.real = {0, 0, 0, 0};
  for (int k = 0; k < w.count; ++k) {
    const DualQuat& q = dqs.at(static_cast<std::size_t>(w.bone[static_cast<std::size_t>(k)]));
    const double s = (qdot(q.real, ref) < 0.0 ? -1.0 : 1.0) * w.weight[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < 4; ++i) {
      b.real[i] += s * q.real[i];
      b.dual[i] += s * q.dual[i];
    }
  }
  const double n = std::sqrt(qdot(b.real, b.real));
  for (std::size_t i = 0; i < 4; ++i) {
    b.real[i] /= n;
    b.dual[i] /= n;
  }
  return b;
}

std::vector<Vec3> dqs(const std::vector<Vec3>& points, const WeightSet& weights,
                      const std::vector<BoneTransform>& transforms, unsigned threads) {
  if (weights.size() != points.size()) throw Error(ErrorCode::kOutOfRange, "one weight set per point required");
  std::vector<char> used(transforms.size(), 0);
  for (const PointWeights& w : weights) {
    for (int k = 0; k < w.count; ++k) used.at(static_cast<std::size_t>(w.bone[static_cast<std::size_t>(k)])) = 1;
  }
  std::vector<DualQuat> q(transforms.size());
  for (std::size_t b = 0; b < transforms.size(); ++b) {
    if (!used[b]) continue;
    if (!transforms[b].rigid(1e-9)) throw Error(ErrorCode::kNonRigidTransform, "bone transform has scale");
    q[b] = DualQuat::from_transform(transforms[b]);
  }
  std::vector<Vec3> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = blend_dual_quats(weights[i], q).to_transform().apply(points[i]);
    }
  });
  return out;
}

}  // namespace bskin
