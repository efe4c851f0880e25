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


#include "cli.hpp"

#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bskin/error.hpp"
#include "bskin/io.hpp"
#include "service.hpp"
#include "skinning.hpp"

namespace bskin {
namespace {

struct Args {
  std::string points, skeleton, encoded, pose, out;
  std::string method = "baseline";
  std::string profile_pos = "cubic";
  std::string profile_dir = "cubic";
  bool no_modulation = false;
  bool no_smoothing = false;
  int count = 16;
  double spacing = 0.0;
  int port = 8080;
  std::string host = "127.0.0.1";
  unsigned threads = 0;
};

bool input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kIoError:
    case ErrorCode::kInvalidJointRef:
    case ErrorCode::kInvalidSkeleton:
    case ErrorCode::kNestedSpheres:
    case ErrorCode::kSkeletonMismatch:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kNonRigidTransform:
    case ErrorCode::kDegenerateBone:
      return true;
    default:
      return false;
  }
}

Profile profile_of(const std::string& name) { return name == "linear" ? Profile::kLinear : Profile::kCubic; }

SkinOptions options_of(const Args& a) {
  SkinOptions o;
  o.profile_position = profile_of(a.profile_pos);
  o.profile_direction = profile_of(a.profile_dir);
  o.modulation = !a.no_modulation;
  o.unfold_smoothing = !a.no_smoothing;
  return o;
}

EncodedSet encode_file(const Args& a, const SkeletonFile& sf, std::ostream& out) {
  const PointCloud cloud = load_cloud(a.points);
  const Registration reg =
      sf.registration ? *sf.registration : register_closest(sf.skeleton, cloud.positions);
  EncodedSet set = encode(sf.skeleton, reg, cloud.positions, a.threads);
  out << "encoded " << set.points.size() << " points";
  if (!set.issues.empty()) out << " (" << set.issues.size() << " flagged)";
  out << "\n";
  return set;
}

void deform_to_file(const Args& a, const SkeletonFile& sf, const EncodedSet& set, std::ostream& out) {
  const Pose pose = load_pose(a.pose);
  PointCloud result;
  result.positions = run_method(parse_method(a.method), sf.skeleton, set, pose, options_of(a), a.threads);
  save_cloud(result, a.out);
  out << "wrote " << result.positions.size() << " points to " << a.out << "\n";
}

void add_skin_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--method", a.method, "Skinner")->check(CLI::IsMember({"baseline", "lbs", "dqs"}));
  cmd->add_option("--profile-pos", a.profile_pos, "Position profile")->check(CLI::IsMember({"cubic", "linear"}));
  cmd->add_option("--profile-dir", a.profile_dir, "Direction profile")->check(CLI::IsMember({"cubic", "linear"}));
  cmd->add_flag("--no-modulation", a.no_modulation, "Keep detail heights unmodulated");
  cmd->add_flag("--no-smoothing", a.no_smoothing, "Disable unfold smoothing");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point-set skinning over sphere-mesh skeletons", "bskin"};
  app.require_subcommand(1);
  app.fallthrough();
  Args a;
  app.add_option("--threads", a.threads, "Worker threads (0 = all)");

  CLI::App* enc = app.add_subcommand("encode", "Encode a point cloud against a skeleton");
  enc->add_option("--points", a.points, "Point cloud (.xyz or .ply)")->required();
  enc->add_option("--skeleton", a.skeleton, "Skeleton JSON")->required();
  enc->add_option("--out", a.out, "Encoded output file")->required();

  CLI::App* def = app.add_subcommand("deform", "Re-synthesize an encoded cloud under a pose");
  def->add_option("--encoded", a.encoded, "Encoded file")->required();
  def->add_option("--skeleton", a.skeleton, "Skeleton JSON")->required();
  def->add_option("--pose", a.pose, "Pose JSON")->required();
  def->add_option("--out", a.out, "Output cloud (.xyz or .ply)")->required();
  add_skin_flags(def, a);

  CLI::App* bake = app.add_subcommand("bake", "Encode and deform in one step");
  bake->add_option("--points", a.points, "Point cloud (.xyz or .ply)")->required();
  bake->add_option("--skeleton", a.skeleton, "Skeleton JSON")->required();
  bake->add_option("--pose", a.pose, "Pose JSON")->required();
  bake->add_option("--out", a.out, "Output cloud (.xyz or .ply)")->required();
  add_skin_flags(bake, a);

  CLI::App* base = app.add_subcommand("baselines", "Write sampled baseline polylines as JSON");
  base->add_option("--skeleton", a.skeleton, "Skeleton JSON")->required();
  base->add_option("--pose", a.pose, "Pose JSON (rest when omitted)");
  base->add_option("--count", a.count, "Number of baselines")->check(CLI::NonNegativeNumber);
  base->add_option("--spacing", a.spacing, "Sample spacing (0 = 1% of the scene diagonal)");
  base->add_option("--out", a.out, "Output JSON")->required();

  CLI::App* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", a.port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", a.host, "Bind address");
  serve->add_option("--skeleton", a.skeleton, "Skeleton JSON")->required();
  serve->add_option("--points", a.points, "Point cloud (.xyz or .ply)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto used = app.get_subcommands();
    err << (used.empty() ? app.help() : used.front()->help());
    return kExitInput;
  }

  try {
    if (*enc) {
      const SkeletonFile sf = load_skeleton(a.skeleton);
      save_encoded(encode_file(a, sf, out), a.out);
    } else if (*def) {
      const SkeletonFile sf = load_skeleton(a.skeleton);
      deform_to_file(a, sf, load_encoded(a.encoded), out);
    } else if (*bake) {
      const SkeletonFile sf = load_skeleton(a.skeleton);
      deform_to_file(a, sf, encode_file(a, sf, out), out);
    } else if (*base) {
      const SkeletonFile sf = load_skeleton(a.skeleton);
      const Pose pose = a.pose.empty() ? Pose{} : load_pose(a.pose);
      write_file(a.out, posed_baselines_to_json(sf.skeleton, pose, a.count, a.spacing));
      out << "wrote " << a.count << " baselines to " << a.out << "\n";
    } else if (*serve) {
      SkeletonFile sf = load_skeleton(a.skeleton);
      const PointCloud cloud = load_cloud(a.points);
      const Service service(std::move(sf.skeleton), cloud.positions, sf.registration, a.threads, &err);
      out << "serving " << service.encoded().points.size() << " points on http://" << a.host << ":" << a.port
          << "\n"
          << std::flush;
      if (!run_service(service, a.host, a.port)) {
        err << "error: cannot listen on " << a.host << ":" << a.port << "\n";
        return kExitInput;
      }
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return input_error(e.code()) ? kExitInput : kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace bskin
