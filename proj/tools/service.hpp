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


// HTTP service over one encoded model. Handlers are plain functions of the
// request so they can be exercised without a socket.

#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bskin/pipeline.hpp"
#include "bskin/reference_skinners.hpp"

namespace httplib {
class Server;
}

namespace bskin {

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service {
 public:
  /// Encodes `points` at construction. Uses the nearest-bone registration
  /// when none is given.
  Service(Skeleton skeleton, const std::vector<Vec3>& points, const std::optional<Registration>& registration,
          unsigned threads = 0, std::ostream* log = nullptr);

  ServiceResponse get_skeleton() const;
  /// Rest frame as rebuilt by the pipeline, at most `lod` points.
  ServiceResponse get_points(const std::string& lod) const;
  /// Body: a pose object, optionally wrapped as {"pose": ..., "options": ...,
  /// "method": ...}; options may also sit at the top level.
  ServiceResponse post_pose(const std::string& body, const std::string& lod) const;
  /// Posed baselines when `pose_body` is non-empty, rest baselines otherwise.
  ServiceResponse get_baselines(const std::string& count, const std::string& pose_body = {}) const;
  ServiceResponse get_health() const;

  /// Routes /api/* on `server`.
  void install(httplib::Server& server) const;

  const Skeleton& skeleton() const { return skeleton_; }
  const EncodedSet& encoded() const { return encoded_; }

 private:
  template <class Fn>
  ServiceResponse guarded(Fn&& fn) const;
  const WeightSet& weights() const;

  Skeleton skeleton_;
  EncodedSet encoded_;
  unsigned threads_;
  std::ostream* log_;
  std::vector<Vec3> rest_frame_;
  mutable std::once_flag weights_once_;
  mutable WeightSet weights_;
  mutable std::atomic<std::uint64_t> next_diagnostic_{1};
  mutable std::mutex log_mutex_;
};

/// Serves until the process stops. Returns false when the port cannot be bound.
bool run_service(const Service& service, const std::string& host, int port);

}  // namespace bskin
