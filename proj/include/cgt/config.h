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

#ifndef CGT_CONFIG_H_
#define CGT_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgt/algorithms.h"
#include "cgt/compression.h"
#include "cgt/problems.h"
#include "cgt/topology.h"

namespace cgt {

// Carries the offending "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct TopologySpec {
  std::string kind = "ring";         // ring | complete
  int n = 10;
  bool directed = false;
  std::string weights = "outdegree";  // outdegree | laplacian
  std::vector<double> p{0.1};         // one value, or one per agent
  double a = 0.0;                     // laplacian step
};

struct ProblemSpec {
  int n = 10;
  int p = 20;
  double rho = 0.01;
  double noise_std = 5.0;
  // first seed on which plain GT is stable at the figure step sizes
  std::uint64_t seed = 5;
};

struct ExperimentConfig {
  std::string name = "run";
  TopologySpec topology;
  ProblemSpec problem;
  Algorithm algorithm = Algorithm::kCgtEfficient;
  std::string compressor = "identity";
  std::uint64_t seed = 1;
  int K = 5000;
  int trace_every = 10;
  int threads = 1;  // 1 = serial kernels, 0 = OpenMP default
  bool certify = false;
  HyperParams hyper;
  std::string output;  // trace CSV path, empty = derived from name
};

// Flat INI text: [topology] [problem] [algorithm] [hyper] [output].
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string to_ini(const ExperimentConfig& cfg);

// Throws ConfigError naming the field.
void validate(const ExperimentConfig& cfg);

Graph build_graph(const TopologySpec& t);
WeightMatrix build_weights(const TopologySpec& t);
RidgeProblem build_problem(const ProblemSpec& p);
CompressorKind compressor_of(const ExperimentConfig& cfg);

}  // namespace cgt

#endif  // CGT_CONFIG_H_
