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

#include "cgt/problems.h"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace cgt {

RidgeProblem make_ridge(Mat u, Vec v, double rho) {
  if (u.rows() != v.size()) throw std::invalid_argument("ridge: u has " + std::to_string(u.rows()) +
                                                        " rows but v has " + std::to_string(v.size()));
  if (u.rows() < 1 || u.cols() < 1) throw std::invalid_argument("ridge: need n >= 1 and p >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("ridge: rho must be > 0");
  RidgeProblem pb;
  pb.n = static_cast<int>(u.rows());
  pb.p = static_cast<int>(u.cols());
  pb.u = std::move(u);
  pb.v = std::move(v);
  pb.rho = rho;
  return pb;
}

RidgeProblem generate_ridge(int n, int p, double rho, double noise_std, std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("ridge: need n >= 1 and p >= 1");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("ridge: noise_std must be >= 0");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Mat u(n, p);
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) u(i, j) = unif(gen);
    // agent i's ground truth: every coordinate at level i/(n-1)
    double level = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    v(i) = u.row(i).sum() * level + noise_std * noise(gen);
  }
  return make_ridge(std::move(u), std::move(v), rho);
}

double local_objective(const RidgeProblem& pb, int i, const Vec& x) {
  double r = pb.u.row(i).dot(x) - pb.v(i);
  return r * r + pb.rho * x.squaredNorm();
}

double objective(const RidgeProblem& pb, const Vec& x) {
  double s = 0.0;
  for (int i = 0; i < pb.n; ++i) s += local_objective(pb, i, x);
  return s / pb.n;
}

void local_gradient_into(const RidgeProblem& pb, int i, std::span<const double> x, std::span<double> out) {
  const int p = pb.p;
  const double* ui = pb.u.row(i).data();
  double r = -pb.v(i);
  for (int j = 0; j < p; ++j) r += ui[j] * x[j];
  for (int j = 0; j < p; ++j) out[j] = 2.0 * r * ui[j] + 2.0 * pb.rho * x[j];
}

Vec local_gradient(const RidgeProblem& pb, int i, const Vec& x) {
  if (i < 0 || i >= pb.n) throw std::out_of_range("agent index " + std::to_string(i) + " out of range");
  if (x.size() != pb.p) throw std::invalid_argument("gradient: x has wrong dimension");
  Vec g(pb.p);
  local_gradient_into(pb, i, std::span<const double>(x.data(), pb.p), std::span<double>(g.data(), pb.p));
  return g;
}

Vec average_gradient(const RidgeProblem& pb, const Vec& x) {
  Vec g = Vec::Zero(pb.p);
  for (int i = 0; i < pb.n; ++i) g += local_gradient(pb, i, x);
  return g / pb.n;
}

OptimalSolution optimal_solution(const RidgeProblem& pb) {
  Eigen::MatrixXd a = pb.u.transpose() * pb.u;
  a.diagonal().array() += pb.n * pb.rho;
  Vec b = pb.u.transpose() * pb.v;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ridge system not positive definite");
  OptimalSolution sol;
  sol.x_star = llt.solve(b);
  sol.f_star = objective(pb, sol.x_star);
  return sol;
}

ProblemConstants constants(const RidgeProblem& pb) {
  Eigen::MatrixXd h = (2.0 / pb.n) * (pb.u.transpose() * pb.u);
  h.diagonal().array() += 2.0 * pb.rho;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  ProblemConstants c;
  // mu >= 2 rho holds analytically; clamp rounding below it
  c.mu = std::max(es.eigenvalues()(0), 2.0 * pb.rho);
  c.L_i.resize(pb.n);
  for (int i = 0; i < pb.n; ++i) c.L_i[i] = 2.0 * pb.u.row(i).squaredNorm() + 2.0 * pb.rho;
  c.L = *std::max_element(c.L_i.begin(), c.L_i.end());
  c.kappa = c.L / c.mu;
  return c;
}

Mat random_initial_point(int n, int p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = unif(gen);
  return x;
}

std::string dump_problem(const RidgeProblem& pb) {
  nlohmann::json j;
  j["n"] = pb.n;
  j["p"] = pb.p;
  j["rho"] = pb.rho;
  auto& rows = j["u"] = nlohmann::json::array();
  for (int i = 0; i < pb.n; ++i) {
    std::vector<double> r(pb.u.row(i).data(), pb.u.row(i).data() + pb.p);
    rows.push_back(r);
  }
  j["v"] = std::vector<double>(pb.v.data(), pb.v.data() + pb.n);
  return j.dump(1);
}

RidgeProblem load_problem(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  int n = j.at("n").get<int>();
  int p = j.at("p").get<int>();
  Mat u(n, p);
  Vec v(n);
  const auto& rows = j.at("u");
  if (static_cast<int>(rows.size()) != n) throw std::invalid_argument("problem dump: u row count != n");
  for (int i = 0; i < n; ++i) {
    auto r = rows[i].get<std::vector<double>>();
    if (static_cast<int>(r.size()) != p) throw std::invalid_argument("problem dump: u row length != p");
    for (int k = 0; k < p; ++k) u(i, k) = r[k];
  }
  auto vv = j.at("v").get<std::vector<double>>();
  if (static_cast<int>(vv.size()) != n) throw std::invalid_argument("problem dump: v length != n");
  for (int i = 0; i < n; ++i) v(i) = vv[i];
  return make_ridge(std::move(u), std::move(v), j.at("rho").get<double>());
}

}  // namespace cgt
