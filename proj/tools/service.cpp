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


#include "service.hpp"

#include <charconv>
#include <utility>

#include "bskin/error.hpp"
#include "bskin/io.hpp"
#include "httplib.h"
#include "json.hpp"
#include "skinning.hpp"

namespace bskin {
namespace {

using nlohmann::json;

constexpr const char* kBinary = "application/octet-stream";

std::size_t parse_count(const std::string& text, std::size_t fallback, const char* what) {
  if (text.empty()) return fallback;
  std::size_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be a non-negative integer");
  }
  return v;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidJointRef:
      return 409;
    case ErrorCode::kParseError:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kNonRigidTransform:
    case ErrorCode::kUnsupportedFormat:
      return 400;
    default:
      return 500;
  }
}

ServiceResponse error_response(int status, const std::string& message, std::string_view code,
                               const std::string& diagnostic) {
  json j;
  j["version"] = 1;
  j["error"] = message;
  j["code"] = code;
  if (!diagnostic.empty()) j["diagnostic_id"] = diagnostic;
  return {status, "application/json", j.dump()};
}

struct PoseRequest {
  Pose pose;
  SkinOptions options;
  Method method = Method::kBaseline;
};

PoseRequest parse_pose_request(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("request body: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "request body must be a JSON object");
  PoseRequest r;
  r.pose = parse_pose_json(j.contains("pose") ? j.at("pose").dump() : body);
  r.options = parse_skin_options(j.contains("options") ? j.at("options").dump() : body);
  if (j.contains("method")) {
    if (!j.at("method").is_string()) throw Error(ErrorCode::kParseError, "method must be a string");
    r.method = parse_method(j.at("method").get<std::string>());
  }
  return r;
}

}  // namespace

Service::Service(Skeleton skeleton, const std::vector<Vec3>& points, const std::optional<Registration>& registration,
                 unsigned threads, std::ostream* log)
    : skeleton_(std::move(skeleton)), threads_(threads), log_(log) {
  const Registration reg = registration ? *registration : register_closest(skeleton_, points);
  encoded_ = encode(skeleton_, reg, points, threads_);
  rest_frame_ = skin(skeleton_, encoded_, Pose{}, SkinOptions{}, threads_).points;
}

template <class Fn>
ServiceResponse Service::guarded(Fn&& fn) const {
  try {
    return fn();
  } catch (const Error& e) {
    const int status = status_for(e.code());
    std::string diagnostic;
    if (status == 500) {
      diagnostic = "d" + std::to_string(next_diagnostic_.fetch_add(1));
      if (log_) {
        std::lock_guard<std::mutex> lock(log_mutex_);
        *log_ << "[" << diagnostic << "] " << to_string(e.code()) << ": " << e.what() << "\n";
      }
    }
    return error_response(status, e.what(), to_string(e.code()), diagnostic);
  } catch (const std::exception& e) {
    const std::string diagnostic = "d" + std::to_string(next_diagnostic_.fetch_add(1));
    if (log_) {
      std::lock_guard<std::mutex> lock(log_mutex_);
      *log_ << "[" << diagnostic << "] internal: " << e.what() << "\n";
    }
    return error_response(500, "internal error", "Internal", diagnostic);
  }
}

const WeightSet& Service::weights() const {
  std::call_once(weights_once_, [&] { weights_ = gaussian_weights(skeleton_, rest_frame_, 1.0, threads_); });
  return weights_;
}

ServiceResponse Service::get_skeleton() const {
  return guarded([&] { return ServiceResponse{200, "application/json", skeleton_to_json(skeleton_)}; });
}

ServiceResponse Service::get_points(const std::string& lod) const {
  return guarded([&] {
    return ServiceResponse{200, kBinary, points_to_binary(rest_frame_, parse_count(lod, 0, "lod"))};
  });
}

ServiceResponse Service::post_pose(const std::string& body, const std::string& lod) const {
  return guarded([&] {
    const std::size_t k = parse_count(lod, 0, "lod");
    const PoseRequest r = parse_pose_request(body);
    std::vector<Vec3> pts;
    if (r.method == Method::kBaseline) {
      pts = run_method(r.method, skeleton_, encoded_, r.pose, r.options, threads_);
    } else {
      pts = run_method(r.method, skeleton_, encoded_, r.pose, r.options, threads_, &rest_frame_, &weights());
    }
    return ServiceResponse{200, kBinary, points_to_binary(pts, k)};
  });
}

ServiceResponse Service::get_baselines(const std::string& count, const std::string& pose_body) const {
  return guarded([&] {
    const std::size_t n = parse_count(count, 16, "count");
    if (n > 100000) throw Error(ErrorCode::kOutOfRange, "count must not exceed 100000");
    const Pose pose = pose_body.empty() ? Pose{} : parse_pose_request(pose_body).pose;
    return ServiceResponse{200, "application/json",
                           posed_baselines_to_json(skeleton_, pose, static_cast<int>(n))};
  });
}

ServiceResponse Service::get_health() const { return {200, "application/json", R"({"status":"ok","version":1})"}; }

void Service::install(httplib::Server& server) const {
  const auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, get_health());
  });
  server.Get("/api/skeleton", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, get_skeleton());
  });
  server.Get("/api/points", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_points(req.get_param_value("lod")));
  });
  server.Post("/api/pose", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_pose(req.body, req.get_param_value("lod")));
  });
  server.Get("/api/baselines", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_baselines(req.get_param_value("count")));
  });
  server.Post("/api/baselines", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_baselines(req.get_param_value("count"), req.body.empty() ? "{}" : req.body));
  });
}

bool run_service(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.install(server);
  return server.listen(host, port);
}

}  // namespace bskin
