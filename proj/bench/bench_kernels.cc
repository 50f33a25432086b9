// Copyright 2026 The cgt Authors. All Rights Reserved.
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
// =============================================================================

// Serial reference kernels against their OpenMP counterparts.
// Arg 0 is the agent count; the policy is part of the benchmark name.

#include <benchmark/benchmark.h>

#include "cgt/algorithms.h"
#include "cgt/kernels.h"
#include "cgt/problems.h"
#include "cgt/topology.h"

namespace {

constexpr int kDim = 256;

cgt::WeightMatrix ring(int n) {
  return cgt::build_weights_outdegree(cgt::build_ring(n, false), std::vector<double>(n, 0.25));
}

template <cgt::ExecutionPolicy P>
void BM_MixRows(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto w = ring(n);
  const cgt::Mat x = cgt::random_initial_point(n, kDim, 3);
  cgt::Mat out;
  for (auto _ : st) {
    cgt::kernels::mix_rows(w, x, out, P);
    benchmark::DoNotOptimize(out.data());
  }
}

template <cgt::ExecutionPolicy P>
void BM_Gradients(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto pb = cgt::generate_ridge(n, kDim, 0.01, 5.0, 1);
  const cgt::Mat x = cgt::random_initial_point(n, kDim, 3);
  cgt::Mat g;
  for (auto _ : st) {
    cgt::kernels::gradients(pb, x, g, P);
    benchmark::DoNotOptimize(g.data());
  }
}

template <cgt::ExecutionPolicy P>
void BM_CompressQuant(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const cgt::Mat x = cgt::random_initial_point(n, kDim, 3);
  const cgt::CompressorKind kind = cgt::UnbiasedQuantize{2, 2.0};
  cgt::Mat q;
  std::uint64_t k = 0;
  for (auto _ : st) {
    cgt::kernels::compress_rows(kind, x, 7, k++, cgt::RngTag::kXDiff, q, P);
    benchmark::DoNotOptimize(q.data());
  }
}

template <cgt::ExecutionPolicy P>
void BM_EfcgtStep(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto w = ring(n);
  const auto pb = cgt::generate_ridge(n, kDim, 0.01, 5.0, 1);
  cgt::HyperParams hp;
  hp.eta = 1e-3;
  cgt::Simulator sim(pb, w, hp, cgt::Algorithm::kEfcgtEfficient, cgt::TopK{8}, 1,
                     cgt::random_initial_point(n, kDim, 3), P);
  for (auto _ : st) sim.step();
}

using cgt::ExecutionPolicy;
BENCHMARK_TEMPLATE(BM_MixRows, ExecutionPolicy::kSerial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_MixRows, ExecutionPolicy::kParallel)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_Gradients, ExecutionPolicy::kSerial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_Gradients, ExecutionPolicy::kParallel)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_CompressQuant, ExecutionPolicy::kSerial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_CompressQuant, ExecutionPolicy::kParallel)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_EfcgtStep, ExecutionPolicy::kSerial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_EfcgtStep, ExecutionPolicy::kParallel)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
