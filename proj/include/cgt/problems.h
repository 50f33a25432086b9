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

#ifndef CGT_PROBLEMS_H_
#define CGT_PROBLEMS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgt/common.h"

namespace cgt {

// f_i(x) = (u_i^T x - v_i)^2 + rho ||x||^2, one sample per agent.
struct RidgeProblem {
  int n = 0;
  int p = 0;
  Mat u;  // n x p, row i is u_i
  Vec v;  // n
  double rho = 0.0;
};

struct ProblemConstants {
  double mu = 0.0;
  std::vector<double> L_i;
  double L = 0.0;
  double kappa = 0.0;
};

struct OptimalSolution {
  Vec x_star;
  double f_star = 0.0;
};

RidgeProblem generate_ridge(int n, int p, double rho, double noise_std, std::uint64_t seed);
RidgeProblem make_ridge(Mat u, Vec v, double rho);

double local_objective(const RidgeProblem& pb, int i, const Vec& x);
double objective(const RidgeProblem& pb, const Vec& x);  // (1/n) sum f_i
Vec local_gradient(const RidgeProblem& pb, int i, const Vec& x);
// Writes g_i(x) into out; x and out have length p.
void local_gradient_into(const RidgeProblem& pb, int i, std::span<const double> x, std::span<double> out);
Vec average_gradient(const RidgeProblem& pb, const Vec& x);

OptimalSolution optimal_solution(const RidgeProblem& pb);
ProblemConstants constants(const RidgeProblem& pb);

// Uniform [0,1]^p starting points, one row per agent.
Mat random_initial_point(int n, int p, std::uint64_t seed);

std::string dump_problem(const RidgeProblem& pb);
RidgeProblem load_problem(const std::string& text);

}  // namespace cgt

#endif  // CGT_PROBLEMS_H_
