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

#ifndef CGT_ANALYSIS_H_
#define CGT_ANALYSIS_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgt/algorithms.h"
#include "cgt/common.h"
#include "cgt/compression.h"
#include "cgt/problems.h"
#include "cgt/topology.h"

namespace cgt {

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ErrorSystemConstants {
  // network
  double s = 0.0, norm_IminusW = 0.0;
  // objective
  double mu = 0.0, L = 0.0, kappa = 0.0;
  int n = 0;
  // compressor
  double C = 0.0, delta = 1.0, r = 1.0;
  // parameters
  double alpha_x = 1.0, alpha_y = 1.0, gamma = 1.0, eta = 0.0;
  double tau_x = 2.0, tau_y = 2.0;
  bool error_feedback = false;

  // compressed gradient tracking
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0, c8 = 0;
  double c_x = 0, c_y = 0, t_x = 0, t_y = 0;
  // error feedback variant (r = 1)
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0, d_x = 0, d_y = 0, tp_x = 0, tp_y = 0;
  // 1 - c_x etc. evaluated without cancellation
  double one_minus_x = 0, one_minus_y = 0;

  double rho_tilde() const { return 1.0 - gamma * s; }
};

// tau defaults to (1 - alpha r delta)^(-1/2), or 2 when alpha r delta = 1.
// Throws InfeasibleError when the compression contraction c_x (or d_x) is not
// below 1, std::invalid_argument on bad inputs.
ErrorSystemConstants make_constants(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                    const CompressorProfile& profile, double alpha_x, double alpha_y,
                                    bool error_feedback, std::optional<double> tau_x = std::nullopt,
                                    std::optional<double> tau_y = std::nullopt);

struct ErrorSystem {
  Mat M;
  Vec gap;  // 1 - M_ii, computed from the closed forms
  Vec epsilon;
  double theta = 1.0;
  double one_minus_theta = 0.0;  // eta mu / 2
};

// Rows/columns: o, c, g, cx, cy (and ex, ey for B).
ErrorSystem build_A(const ErrorSystemConstants& k);
ErrorSystem build_B(const ErrorSystemConstants& k);

struct Certificate {
  double rho_M = 0.0;
  bool componentwise_ok = false;
  bool rho_ok = false;
  double theta = 1.0;
  double certified_gap = 0.0;  // lower bound on 1 - rho(M) from epsilon
  Vec margins;                 // (theta eps - M eps)_i, in gap form
  double gamma = 0.0, eta = 0.0;
  Vec epsilon;
  bool ok() const { return componentwise_ok && rho_ok; }
};

// Nonnegative matrices only. Returns an upper estimate of the Perron root.
double spectral_radius_nonneg(const Mat& m, double tol = 1e-12, int max_iter = 10000);

Certificate certify(const ErrorSystem& sys);

struct SufficientParams {
  ErrorSystemConstants consts;
  ErrorSystem system;
  Certificate certificate;
  Vec epsilon_raw;  // eps_1..eps_5 (or eps_7) before the L^2 scaling
  double gamma = 0.0, eta = 0.0;
};

SufficientParams sufficient_params(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                   const CompressorProfile& profile, double alpha_x, double alpha_y);
SufficientParams sufficient_params_ef(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                      const CompressorProfile& profile, double alpha_x, double alpha_y);

struct RateFit {
  double rate = 1.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  int points = 0;
  int k_begin = 0, k_end = 0;
};

// Least squares of log(residual) on k after dropping the first 10% of the
// horizon; stops at the last positive normal residual.
RateFit empirical_rate(const std::vector<TraceRecord>& trace);
RateFit fit_log_residual(const std::vector<TraceRecord>& trace, int k_begin, int k_end);

std::string certificate_json(const SufficientParams& sp);

// Uncompressed GT on a quadratic is linear: (X, Y) -> T (X, Y). Returns the
// spectral radius of T restricted to states with 1'Y = 1'grad F(X), which is
// the asymptotic rate of the residual (values >= 1 mean divergence).
double gt_spectral_radius(const RidgeProblem& pb, const Mat& w, double eta, double gamma = 1.0);

}  // namespace cgt

#endif  // CGT_ANALYSIS_H_
