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

#ifndef CGT_HARNESS_H_
#define CGT_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cgt/algorithms.h"
#include "cgt/analysis.h"
#include "cgt/config.h"

namespace cgt {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitDiverged = 2, kExitVerify = 3 };

// Default output directory comes from this variable, else ".".
inline constexpr const char* kOutDirEnv = "CGT_OUT_DIR";
std::string default_out_dir();

struct ExperimentOutcome {
  ExperimentConfig cfg;
  RunResult result;
  RateFit fit;
  std::optional<SufficientParams> certificate;
  std::string certificate_error;
  std::string trace_path;
  std::string certificate_path;
};

// Writes <out_dir>/<output or name.csv> (and a certificate JSON when asked).
// An empty out_dir skips all file output.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
std::string trace_csv(const std::vector<TraceRecord>& trace);
std::string summary_line(const ExperimentOutcome& o);

// First recorded k with residual <= level, or -1.
int first_hit(const std::vector<TraceRecord>& trace, double level);

struct Preset {
  std::string name;
  std::string description;
  std::vector<ExperimentConfig> runs;
};
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);  // ConfigError when unknown
std::string preset_listing();

// Throws ConfigError unless every config shares topology, problem and seed.
void check_comparable(const std::vector<ExperimentConfig>& cfgs);
// Residual columns keyed by algorithm/compressor, aligned on k.
std::string merge_traces(const std::vector<ExperimentOutcome>& outcomes);

struct CertifyReport {
  SufficientParams params;
  CompressorProfile profile;
  std::string json;
  // spectral radius of the error matrix at the configured (gamma, eta)
  std::optional<double> configured_rho;
  std::string configured_note;
};
CertifyReport certify_config(const ExperimentConfig& cfg);

// -- invariant batteries, shared by verify and the acceptance binary --

struct InvariantStats {
  double tracking = 0.0;       // max_k max_c |1'Y - 1'grad F(X)|_c / (1 + ||grad F(X)||_F)
  double mean_dynamics = 0.0;  // max_k ||xbar+ - xbar + eta ybar|| / (1 + ||xbar||)
  int steps = 0;
};
InvariantStats invariant_stats(Algorithm a, const RidgeProblem& pb, const WeightMatrix& w,
                               const HyperParams& hp, const CompressorKind& kind, int K, std::uint64_t seed,
                               std::uint64_t x0_seed);

// max_k relative Frobenius deviation of (X, Y) between two variants
double equivalence_deviation(Algorithm ref, Algorithm eff, const RidgeProblem& pb, const WeightMatrix& w,
                             const HyperParams& hp, const CompressorKind& kind, int K, std::uint64_t seed,
                             std::uint64_t x0_seed);

// Same measure between one variant and itself started from x0 with a single
// entry moved by `bump`. A baseline for how fast round-off separates runs.
double perturbation_deviation(Algorithm a, const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, int K, std::uint64_t seed, std::uint64_t x0_seed,
                              double bump = 1e-15);

struct CollapseStats {
  bool gt_bitwise = false;
  double max_ef_error = 0.0;  // max_{k>=1} max(|Ex|, |Ey|) under EF with Identity
};
CollapseStats identity_collapse(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, int K,
                                std::uint64_t seed, std::uint64_t x0_seed);

struct CheckResult {
  std::string name;
  bool passed = false;
  bool expected_failure = false;  // a failure that the check wants to see
  std::string detail;
};
std::vector<CheckResult> verify_suite(std::uint64_t seed = 1);

}  // namespace cgt

#endif  // CGT_HARNESS_H_
