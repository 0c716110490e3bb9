// embr_benchmark.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "embr/compose.h"
#include "embr/inference.h"
#include "embr/losses.h"
#include "embr/mbr.h"
#include "embr/random.h"
#include "embr/trainer.h"

namespace embr {
namespace {

LogitMatrix Logits(std::size_t frames, std::size_t clusters) {
  RandomStream rng(3);
  Matrix<double> m(frames, clusters);
  for (double &v : m.Data()) v = rng.Normal();
  return LogitMatrix(std::move(m));
}

// Unrolled collapsing graph over 4 clusters.
Wfst Unrolled(std::size_t frames) {
  return Compose(BuildScoreFst(Logits(frames, 4)),
                 CollapsingDecoderGraph(4, 3));
}

void BM_Compose(benchmark::State &state) {
  Wfst score = BuildScoreFst(Logits(state.range(0), 4));
  Wfst graph = CollapsingDecoderGraph(4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Compose(score, graph));
}
BENCHMARK(BM_Compose)->Arg(6)->Arg(50)->Arg(500);

void BM_Backward(benchmark::State &state) {
  Wfst u = Unrolled(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Backward(u));
  state.SetItemsProcessed(state.iterations() * u.NumEdges());
}
BENCHMARK(BM_Backward)->Arg(6)->Arg(50)->Arg(500);

void BM_SamplePaths(benchmark::State &state) {
  Wfst u = Unrolled(state.range(0));
  RandomStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(SamplePaths(u, 100, rng));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SamplePaths)->Arg(6)->Arg(50)->Arg(500);

void BM_EmbrEstimate(benchmark::State &state) {
  const std::size_t frames = state.range(0);
  LogitMatrix z = Logits(frames, 4);
  Wfst u = Compose(BuildScoreFst(z), CollapsingDecoderGraph(4, 3));
  LossFunction loss = LossFunction::WordEdit(ReferenceTranscript({1, 2, 3}));
  EstimatorOptions options;
  options.num_samples = 100;
  options.num_threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(EmbrEstimate(u, z, loss, options));
  }
}
BENCHMARK(BM_EmbrEstimate)
    ->Args({6, 1})
    ->Args({50, 1})
    ->Args({500, 1})
    ->Args({500, 4});

void BM_ExpectedLossExact(benchmark::State &state) {
  Wfst u = Unrolled(state.range(0));
  LossFunction loss = LossFunction::WordEdit(ReferenceTranscript({1, 2}));
  for (auto _ : state) benchmark::DoNotOptimize(ExpectedLossExact(u, loss));
}
BENCHMARK(BM_ExpectedLossExact)->Arg(4)->Arg(6);

void BM_EditDistance(benchmark::State &state) {
  RandomStream rng(5);
  std::vector<Label> a(state.range(0));
  std::vector<Label> b(state.range(0));
  for (Label &l : a) l = 1 + static_cast<Label>(rng() % 50);
  for (Label &l : b) l = 1 + static_cast<Label>(rng() % 50);
  for (auto _ : state) benchmark::DoNotOptimize(EditDistance(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(10)->Arg(100)->Arg(1000);

void BM_TrainStep(benchmark::State &state) {
  auto task = MakeSyntheticTask(3, 6, 4, 8, 1, 1);
  TrainConfig config;
  ToyModel model = ToyModel::Zeros(8, 4);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainStep(model, task[0], config, ++seed));
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace
}  // namespace embr

BENCHMARK_MAIN();
