// Copyright 2026 The mdlxf Authors
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


#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mdlxf/codes.h"
#include "mdlxf/compile.h"
#include "mdlxf/grad.h"
#include "mdlxf/ptm.h"
#include "mdlxf/symprog.h"
#include "mdlxf/tasks.h"
#include "mdlxf/toys.h"
#include "mdlxf/train.h"
#include "mdlxf/transformer.h"

namespace mdlxf {
namespace {

std::vector<int> RandomBits(int len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> x(len);
  for (int& b : x) b = static_cast<int>(rng() & 1);
  return x;
}

void BM_PtmRun(benchmark::State& state) {
  const ptm::Machine tm(toys::CountOnesMachine());
  const auto x = RandomBits(static_cast<int>(state.range(0)), 1);
  const ptm::ProgramBits z = {1, 1, 0};
  for (auto _ : state)
    benchmark::DoNotOptimize(ptm::Run(tm, z, x, {10000, 1000}));
}
BENCHMARK(BM_PtmRun)->Arg(8)->Arg(64);

void BM_Enumerate(benchmark::State& state) {
  const ptm::Machine tm(toys::EchoMachine());
  const std::vector<std::vector<int>> probes = {{}, {1}, {0, 1}};
  const int max_len = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ptm::EnumerateHaltingPrograms(tm, {30, 16}, max_len, probes));
}
BENCHMARK(BM_Enumerate)->Arg(8)->Arg(12);

void BM_CompileParity(benchmark::State& state) {
  const auto p = symprog::BuildParityProgram(20);
  for (auto _ : state) benchmark::DoNotOptimize(compile::Compile(p));
}
BENCHMARK(BM_CompileParity);

void BM_ForwardCompiledParity(benchmark::State& state) {
  const auto m = compile::Compile(symprog::BuildParityProgram());
  const auto x = RandomBits(static_cast<int>(state.range(0)), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(transformer::MapInput(m.weights, m.config, x));
}
BENCHMARK(BM_ForwardCompiledParity)->Arg(10)->Arg(40);

void BM_ForwardManualParityFull(benchmark::State& state) {
  static const auto m = tasks::ManualParityBundle();
  const auto x = RandomBits(30, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(transformer::MapInput(m.weights, m.config, x));
}
BENCHMARK(BM_ForwardManualParityFull)->Unit(benchmark::kMillisecond);

void BM_MonteCarloKl(benchmark::State& state) {
  const auto m = compile::Compile(symprog::BuildParityProgram(4));
  const auto b = codes::DeltaPosteriorBundle(m.weights, m.config);
  for (auto _ : state)
    benchmark::DoNotOptimize(codes::MonteCarloKl(b, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_MonteCarloKl)->Arg(1)->Arg(16);

void BM_TransformerTrainStep(benchmark::State& state) {
  tasks::RandomModelConfig rc;
  rc.model_dim = static_cast<int>(state.range(0));
  rc.hidden_dim = 2 * rc.model_dim;
  rc.num_prompts = 4;
  rc.num_layers = 18;
  const auto c = tasks::MakeParityConfig(rc);
  const auto w = tasks::RandomTransformerWeights(c, 1);
  const auto data = tasks::GenParity(1, 10, 32, 1);
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  for (const auto& e : data) {
    ids.push_back(c.vocab.Preprocess(e.bits));
    labels.push_back(e.label);
  }
  for (auto _ : state) {
    grad::Tape t;
    std::vector<grad::Var> p;
    for (const auto& n : transformer::TransformerWeights::ArrayNames())
      p.push_back(t.Leaf(w.Array(n)));
    const auto loss = grad::SoftmaxCrossEntropy(
        train::TransformerBatchLogits(t, p, c, ids), labels);
    t.Backward(loss);
    benchmark::DoNotOptimize(loss.scalar());
  }
}
BENCHMARK(BM_TransformerTrainStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MlpVariationalStep(benchmark::State& state) {
  const train::MlpIdentityObjective obj(tasks::GenIdentity());
  train::TrainConfig c;
  c.total_steps = 10;
  c.warmup_steps = 1;
  c.eval_mc_samples = 1;
  c.eval_nll_samples = 0;
  c.log_every = 1000;
  for (auto _ : state)
    benchmark::DoNotOptimize(train::TrainVariational(obj, tasks::RandomMlpBundle(1), c));
}
BENCHMARK(BM_MlpVariationalStep)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mdlxf

BENCHMARK_MAIN();
