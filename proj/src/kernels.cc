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

#include "cgt/kernels.h"

#include <exception>
#include <span>

namespace cgt {
namespace kernels {

void for_each_agent(ExecutionPolicy policy, int n, const std::function<void(int)>& body) {
  if (policy == ExecutionPolicy::kSerial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  // exceptions cannot leave an omp region; carry the first one out
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(cgt_agent_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

void mix_rows(const WeightMatrix& w, const Mat& in, Mat& out, ExecutionPolicy policy) {
  const Eigen::Index p = in.cols();
  out.resize(in.rows(), p);
  for_each_agent(policy, w.n(), [&](int i) {
    double* o = out.row(i).data();
    for (Eigen::Index c = 0; c < p; ++c) o[c] = 0.0;
    for (const auto& e : w.row(i)) {
      const double* src = in.row(e.j).data();
      for (Eigen::Index c = 0; c < p; ++c) o[c] += e.w * src[c];
    }
  });
}

void gradients(const RidgeProblem& pb, const Mat& x, Mat& g, ExecutionPolicy policy) {
  g.resize(x.rows(), x.cols());
  for_each_agent(policy, pb.n, [&](int i) {
    local_gradient_into(pb, i, std::span<const double>(x.row(i).data(), pb.p),
                        std::span<double>(g.row(i).data(), pb.p));
  });
}

void compress_rows(const CompressorKind& kind, const Mat& z, std::uint64_t seed, std::uint64_t k,
                   RngTag tag, Mat& q, ExecutionPolicy policy) {
  const auto p = static_cast<std::size_t>(z.cols());
  q.resize(z.rows(), z.cols());
  for_each_agent(policy, static_cast<int>(z.rows()), [&](int i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i), k, tag);
    compress_into(kind, std::span<const double>(z.row(i).data(), p), rng,
                  std::span<double>(q.row(i).data(), p));
  });
}

void consensus_update(const Mat& x, const Mat& a, const Mat& b, const Mat& y, double gamma,
                      const Vec& eta, Mat& out, ExecutionPolicy policy) {
  const Eigen::Index p = x.cols();
  out.resize(x.rows(), p);
  for_each_agent(policy, static_cast<int>(x.rows()), [&](int i) {
    const double ei = eta(i);
    for (Eigen::Index c = 0; c < p; ++c)
      out(i, c) = x(i, c) - gamma * (a(i, c) - b(i, c)) - ei * y(i, c);
  });
}

}  // namespace kernels
}  // namespace cgt
