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


#include "skinning.hpp"

#include <string>

#include "bskin/encoder.hpp"
#include "bskin/error.hpp"
#include "bskin/parallel.hpp"

namespace bskin {

Method parse_method(std::string_view name) {
  if (name == "baseline") return Method::kBaseline;
  if (name == "lbs") return Method::kLbs;
  if (name == "dqs") return Method::kDqs;
  throw Error(ErrorCode::kParseError, "unknown method '" + std::string(name) + "'");
}

std::vector<Vec3> decode_all(const Skeleton& sk, const EncodedSet& encoded, unsigned threads) {
  std::vector<Vec3> out(encoded.points.size());
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = decode_rest(sk, encoded.points[i]);
  });
  return out;
}

std::vector<Vec3> run_method(Method method, const Skeleton& sk, const EncodedSet& encoded, const Pose& pose,
                             const SkinOptions& options, unsigned threads, const std::vector<Vec3>* rest_points,
                             const WeightSet* weights) {
  if (method == Method::kBaseline) return skin(sk, encoded, pose, options, threads).points;
  if (encoded.skeleton_fingerprint != sk.fingerprint()) {
    throw Error(ErrorCode::kSkeletonMismatch, "encoded set was made for another skeleton");
  }
  std::vector<Vec3> own_rest;
  if (!rest_points) {
    own_rest = decode_all(sk, encoded, threads);
    rest_points = &own_rest;
  }
  WeightSet own_weights;
  if (!weights) {
    own_weights = gaussian_weights(sk, *rest_points, 1.0, threads);
    weights = &own_weights;
  }
  const std::vector<BoneTransform> t = bone_transforms(sk, pose);
  return method == Method::kLbs ? lbs(*rest_points, *weights, t, threads) : dqs(*rest_points, *weights, t, threads);
}

}  // namespace bskin
