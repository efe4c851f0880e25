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


// Skinner selection shared by the CLI and the HTTP service.

#pragma once

#include <string_view>
#include <vector>

#include "bskin/pipeline.hpp"
#include "bskin/reference_skinners.hpp"

namespace bskin {

enum class Method { kBaseline, kLbs, kDqs };

/// "baseline", "lbs" or "dqs". Throws Error(kParseError).
Method parse_method(std::string_view name);

/// Rest positions reconstructed from the encoding.
std::vector<Vec3> decode_all(const Skeleton& sk, const EncodedSet& encoded, unsigned threads = 0);

/// Posed points for `method`. The reference skinners work on `rest_points`
/// with `weights`; both are computed from the encoding when null.
std::vector<Vec3> run_method(Method method, const Skeleton& sk, const EncodedSet& encoded, const Pose& pose,
                             const SkinOptions& options, unsigned threads = 0,
                             const std::vector<Vec3>* rest_points = nullptr, const WeightSet* weights = nullptr);

}  // namespace bskin
