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


#include <benchmark/benchmark.h>

#include <vector>

#include "bskin/pipeline.hpp"
#include "bskin/reference_skinners.hpp"
#include "clouds.hpp"
#include "scenes.hpp"

namespace {

using namespace bskin;

Bend bend(int sphere, double deg, const Vec3& axis) {
  Bend b;
  b.joint_sphere_id = sphere;
  b.axis = normalized(axis);
  b.angle = deg * kPi / 180.0;
  return b;
}

struct Fixture {
  Skeleton sk = scenes::humanoid();
  clouds::Cloud cloud;
  EncodedSet encoded;
  Pose pose;

  explicit Fixture(std::size_t n) : cloud(clouds::around_bones(sk, n)) {
    encoded = encode(sk, cloud.registration, cloud.points, 1);
    pose.bends = {bend(2, 40.0, {0.2, 0.1, 1.0}), bend(6, 60.0, {0, 0, 1}), bend(9, -50.0, {1, 0, 0}),
                  bend(11, 30.0, {1, 0, 0})};
    pose.twists[5] = 0.5;
  }
};

const Fixture& fixture() {
  static const Fixture f(20000);
  return f;
}

void BM_Encode(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(encode(f.sk, f.cloud.registration, f.cloud.points, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_SkinIdentity(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(skin(f.sk, f.encoded, Pose{}, {}, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_SkinPosed(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(skin(f.sk, f.encoded, f.pose, {}, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_GaussianWeights(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_weights(f.sk, f.cloud.points, 1.0, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_Lbs(benchmark::State& state) {
  const Fixture& f = fixture();
  const WeightSet w = gaussian_weights(f.sk, f.cloud.points, 1.0, 1);
  const auto m = bone_transforms(f.sk, f.pose);
  for (auto _ : state) benchmark::DoNotOptimize(lbs(f.cloud.points, w, m, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_Dqs(benchmark::State& state) {
  const Fixture& f = fixture();
  const WeightSet w = gaussian_weights(f.sk, f.cloud.points, 1.0, 1);
  const auto m = bone_transforms(f.sk, f.pose);
  for (auto _ : state) benchmark::DoNotOptimize(dqs(f.cloud.points, w, m, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

}  // namespace

BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SkinIdentity)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SkinPosed)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussianWeights)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lbs)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dqs)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
