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

#ifndef CGT_ALGORITHMS_H_
#define CGT_ALGORITHMS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgt/common.h"
#include "cgt/compression.h"
#include "cgt/problems.h"
#include "cgt/topology.h"

namespace cgt {

enum class Algorithm { kGt, kCgtReference, kCgtEfficient, kEfcgtReference, kEfcgtEfficient };

// gt, cgt-ref, cgt, efcgt-ref, efcgt
Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);
bool uses_error_feedback(Algorithm a);

struct HyperParams {
  double eta = 0.01;
  double gamma = 1.0;
  double alpha_x = 1.0;
  double alpha_y = 1.0;
  double beta_x = 1.0;
  double beta_y = 1.0;
  std::vector<double> eta_agents;  // optional per-agent step sizes

  Vec eta_vector(int n) const;
  void validate(int n) const;  // throws std::invalid_argument
};

// alpha above 1/r is allowed but flagged.
std::vector<std::string> hyper_warnings(const HyperParams& hp, const CompressorProfile& profile);

// Stacked state; G caches grad F(X).
struct NetworkState {
  Mat X, Y, Hx, Hy, Hxw, Hyw, Ex, Ey, G;
};

struct AgentState {
  Vec x, y, h_x, h_y, h_xw, h_yw, e_x, e_y, grad_prev;
};
AgentState agent_state(const NetworkState& s, int i);

struct TraceRecord {
  int k = 0;
  double residual = 0.0;
  double opt_error = 0.0;
  double consensus_error = 0.0;
  double tracking_error = 0.0;
  double compress_error_x = 0.0;
  double compress_error_y = 0.0;
  double ef_error_x = 0.0;
  double ef_error_y = 0.0;
  std::int64_t bits_sent = 0;
};

// initial_distance is ||X^0 - 1 x*^T||_F^2.
TraceRecord metrics(const NetworkState& s, const Vec& x_star, double initial_distance, int k,
                    std::int64_t bits);

struct RunOptions {
  int K = 1000;
  int trace_every = 1;
  std::uint64_t seed = 1;     // compressor streams
  std::uint64_t x0_seed = 1;  // starting point, ignored when x0 is set
  std::optional<Mat> x0;
  ExecutionPolicy policy = ExecutionPolicy::kSerial;
  double divergence_threshold = 1e12;
  // called with every state k = 0..K
  std::function<void(int, const NetworkState&)> observer;
};

struct RunResult {
  Algorithm algorithm = Algorithm::kGt;
  std::vector<TraceRecord> trace;
  NetworkState final_state;
  HyperParams hp;
  CompressorKind kind;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::int64_t total_bits = 0;
  bool diverged = false;
  std::string diagnostic;
};

// One network, stepped a round at a time. Copyable, so a state can be
// branched and continued under a different seed.
class Simulator {
 public:
  Simulator(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, Algorithm algorithm,
            const CompressorKind& kind, std::uint64_t seed, const Mat& x0,
            ExecutionPolicy policy = ExecutionPolicy::kSerial);

  void step();
  int iteration() const { return k_; }
  const NetworkState& state() const { return s_; }
  std::int64_t bits_sent() const { return bits_; }
  std::int64_t bits_per_round() const;
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  Algorithm algorithm() const { return algorithm_; }

 private:
  void step_gt();
  void step_cgt_reference();
  void step_cgt_efficient();
  void step_efcgt_reference();
  void step_efcgt_efficient();
  void finish_round(const Mat& xhat_a, const Mat& xhat_b, const Mat& yhat_a, const Mat& yhat_b);

  const RidgeProblem* pb_;
  const WeightMatrix* w_;
  HyperParams hp_;
  Algorithm algorithm_;
  CompressorKind kind_;
  std::uint64_t seed_;
  ExecutionPolicy policy_;
  Vec eta_;
  NetworkState s_;
  int k_ = 0;
  std::int64_t bits_ = 0;
  // scratch
  Mat z_, q_, qh_, xhat_, yhat_, mix_x_, mix_y_, xn_, yn_, gn_;
};

RunResult run(Algorithm algorithm, const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
              const CompressorKind& kind, const RunOptions& opts);

RunResult run_gt(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, const RunOptions& opts);
RunResult run_cgt_reference(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                            const CompressorKind& kind, const RunOptions& opts);
RunResult run_cgt_efficient(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                            const CompressorKind& kind, const RunOptions& opts);
RunResult run_efcgt_reference(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, const RunOptions& opts);
RunResult run_efcgt_efficient(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, const RunOptions& opts);

}  // namespace cgt

#endif  // CGT_ALGORITHMS_H_
