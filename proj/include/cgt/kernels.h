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

#ifndef CGT_KERNELS_H_
#define CGT_KERNELS_H_

#include <cstdint>
#include <functional>

#include "cgt/common.h"
#include "cgt/compression.h"
#include "cgt/problems.h"
#include "cgt/topology.h"

namespace cgt {
namespace kernels {

// Runs body(i) for every agent. Each call must touch only row i of its
// outputs, so the serial and OpenMP paths produce the same bits.
void for_each_agent(ExecutionPolicy policy, int n, const std::function<void(int)>& body);

// out.row(i) = sum_j w_ij in.row(j), j ascending.
void mix_rows(const WeightMatrix& w, const Mat& in, Mat& out, ExecutionPolicy policy);

// g.row(i) = grad f_i(x.row(i)).
void gradients(const RidgeProblem& pb, const Mat& x, Mat& g, ExecutionPolicy policy);

// q.row(i) = C(z.row(i)) with the stream keyed by (seed, i, k, tag).
void compress_rows(const CompressorKind& kind, const Mat& z, std::uint64_t seed, std::uint64_t k,
                   RngTag tag, Mat& q, ExecutionPolicy policy);

// out = x - gamma (a - b) - eta_i y, row-wise; the shared consensus update.
void consensus_update(const Mat& x, const Mat& a, const Mat& b, const Mat& y, double gamma,
                      const Vec& eta, Mat& out, ExecutionPolicy policy);

}  // namespace kernels
}  // namespace cgt

#endif  // CGT_KERNELS_H_
