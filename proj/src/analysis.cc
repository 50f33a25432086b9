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

#include "cgt/analysis.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "json.hpp"

namespace cgt {
namespace {

constexpr double kSafety = 1.01;

struct Contraction {
  double tau, c, one_minus_c;
};

// c = tau (1 - a). With the default tau, 1 - c = a / (1 + sqrt(1 - a)).
Contraction contraction(double a, std::optional<double> tau, const char* which) {
  if (!(a > 0.0) || a > 1.0 + 1e-12)
    throw InfeasibleError(std::string(which) + ": alpha*r*delta must lie in (0, 1], got " +
                          std::to_string(a));
  a = std::min(a, 1.0);
  Contraction out{};
  if (tau) {
    if (!(*tau > 1.0)) throw std::invalid_argument(std::string(which) + ": tau must exceed 1");
    out.tau = *tau;
    out.c = *tau * (1.0 - a);
    out.one_minus_c = 1.0 - out.c;
  } else if (a == 1.0) {
    out.tau = 2.0;
    out.c = 0.0;
    out.one_minus_c = 1.0;
  } else {
    const double root = std::sqrt(1.0 - a);
    out.tau = 1.0 / root;
    out.c = root;
    out.one_minus_c = a / (1.0 + root);
  }
  if (!(out.one_minus_c > 0.0))
    throw InfeasibleError(std::string(which) + ": compression contraction " + std::to_string(out.c) +
                          " is not below 1");
  return out;
}

void check_step_sizes(const ErrorSystemConstants& k) {
  if (!(k.gamma > 0.0) || k.gamma > 1.0)
    throw std::invalid_argument("gamma must lie in (0, 1]");
  if (k.gamma * k.s > 1.0) throw std::invalid_argument("gamma * s must not exceed 1");
  if (!(k.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const double cap = std::min(2.0 / (k.mu + k.L), 1.0 / (3.0 * k.mu));
  if (!(k.eta < cap))
    throw std::invalid_argument("eta must be below min(2/(mu+L), 1/(3 mu)) = " + std::to_string(cap));
}

double consensus_gap(const ErrorSystemConstants& k) {
  const double gs = k.gamma * k.s;
  return gs * (2.0 - gs) / 2.0;
}

}  // namespace

ErrorSystemConstants make_constants(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                    const CompressorProfile& profile, double alpha_x, double alpha_y,
                                    bool error_feedback, std::optional<double> tau_x,
                                    std::optional<double> tau_y) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(pc.mu > 0.0) || pc.L < pc.mu) throw std::invalid_argument("need 0 < mu <= L");
  if (!(spec.s > 0.0) || spec.s > 1.0 + 1e-12) throw std::invalid_argument("s must lie in (0, 1]");
  if (profile.C < 0.0 || !(profile.delta > 0.0) || profile.delta > 1.0 || !(profile.r > 0.0))
    throw std::invalid_argument("compressor profile out of range");

  ErrorSystemConstants k;
  k.s = spec.s;
  k.norm_IminusW = spec.norm_IminusW;
  k.mu = pc.mu;
  k.L = pc.L;
  k.kappa = pc.L / pc.mu;
  k.n = n;
  k.C = profile.C;
  k.delta = profile.delta;
  k.r = profile.r;
  k.alpha_x = alpha_x;
  k.alpha_y = alpha_y;
  k.error_feedback = error_feedback;

  const double w2 = spec.norm_IminusW * spec.norm_IminusW;
  if (!error_feedback) {
    const auto cx = contraction(alpha_x * profile.r * profile.delta, tau_x, "x");
    const auto cy = contraction(alpha_y * profile.r * profile.delta, tau_y, "y");
    k.tau_x = cx.tau;
    k.tau_y = cy.tau;
    k.c_x = cx.c;
    k.c_y = cy.c;
    k.one_minus_x = cx.one_minus_c;
    k.one_minus_y = cy.one_minus_c;
    k.t_x = 3.0 * cx.tau / (cx.tau - 1.0);
    k.t_y = 3.0 * cy.tau / (cy.tau - 1.0);
    k.c1 = 2.0 / k.s;
    k.c2 = 2.0 * k.C * w2 / k.s;
    k.c3 = 12.0 * k.L * k.L / k.s;
    k.c4 = 6.0 * w2 / k.s;
    k.c5 = k.t_x * w2;
    k.c6 = k.t_x * k.C * w2;
    k.c7 = k.t_y * k.C * w2;
    k.c8 = k.t_y * w2;
  } else {
    if (std::abs(profile.r - 1.0) > 1e-12)
      throw std::invalid_argument("error feedback analysis needs a profile with r = 1");
    const auto dx = contraction(alpha_x * profile.delta, tau_x, "x");
    const auto dy = contraction(alpha_y * profile.delta, tau_y, "y");
    k.tau_x = dx.tau;
    k.tau_y = dy.tau;
    k.d_x = dx.c;
    k.d_y = dy.c;
    k.one_minus_x = dx.one_minus_c;
    k.one_minus_y = dy.one_minus_c;
    k.tp_x = 3.0 * dx.tau / (dx.tau - 1.0);
    k.tp_y = 3.0 * dy.tau / (dy.tau - 1.0);
    k.d1 = 2.0 / k.s;
    k.d2 = 2.0 * w2 / k.s;
    k.d3 = k.tp_x * w2;
    k.d4 = k.tp_y * w2;
  }
  return k;
}

ErrorSystem build_A(const ErrorSystemConstants& k) {
  if (k.error_feedback) throw std::invalid_argument("build_A needs constants without error feedback");
  check_step_sizes(k);
  const double g = k.gamma, e = k.eta, L2 = k.L * k.L, n = k.n;
  const double rt = k.rho_tilde(), half = (1.0 + rt * rt) / 2.0;

  ErrorSystem sys;
  Mat& M = sys.M;
  M = Mat::Zero(5, 5);
  M(0, 0) = 1.0 - 1.5 * e * k.mu;
  M(0, 1) = 3.0 * e * L2 / (k.mu * n);

  M(1, 1) = half;
  M(1, 2) = k.c1 * e * e / g;
  M(1, 3) = k.c2 * g;

  M(2, 0) = n * k.c3 * L2 * e * e / g;
  M(2, 1) = k.c3 * L2 * e * e / g + k.c4 * L2 * g;
  M(2, 2) = half + 0.5 * k.c3 * e * e / g;
  M(2, 3) = 3.0 * k.c2 * L2 * g;
  M(2, 4) = k.c2 * g;

  M(3, 0) = 2.0 * n * k.t_x * L2 * e * e;
  M(3, 1) = k.c5 * g * g + 2.0 * k.t_x * L2 * e * e;
  M(3, 2) = k.t_x * e * e;
  M(3, 3) = k.c_x + k.c6 * g * g;

  M(4, 0) = 6.0 * n * k.t_y * L2 * L2 * e * e;
  M(4, 1) = 3.0 * k.c8 * L2 * g * g + 6.0 * k.t_y * L2 * L2 * e * e;
  M(4, 2) = 3.0 * k.t_y * L2 * e * e + k.c8 * g * g;
  M(4, 3) = 3.0 * k.c7 * L2 * g * g;
  M(4, 4) = k.c_y + k.c7 * g * g;

  sys.gap.resize(5);
  sys.gap(0) = 1.5 * e * k.mu;
  sys.gap(1) = consensus_gap(k);
  sys.gap(2) = consensus_gap(k) - 0.5 * k.c3 * e * e / g;
  sys.gap(3) = k.one_minus_x - k.c6 * g * g;
  sys.gap(4) = k.one_minus_y - k.c7 * g * g;
  sys.one_minus_theta = e * k.mu / 2.0;
  sys.theta = 1.0 - sys.one_minus_theta;
  return sys;
}

ErrorSystem build_B(const ErrorSystemConstants& k) {
  if (!k.error_feedback) throw std::invalid_argument("build_B needs error feedback constants");
  check_step_sizes(k);
  const double g = k.gamma, e = k.eta, L2 = k.L * k.L, n = k.n, dl = k.delta;
  const double rt = k.rho_tilde(), half = (1.0 + rt * rt) / 2.0;

  ErrorSystem sys;
  Mat& M = sys.M;
  M = Mat::Zero(7, 7);
  M(0, 0) = 1.0 - 1.5 * e * k.mu;
  M(0, 1) = 3.0 * e * L2 / (k.mu * n);

  M(1, 1) = half;
  M(1, 2) = k.d1 * e * e / g;
  M(1, 3) = k.d2 * g;
  M(1, 5) = 6.0 * k.d2 * g / dl;

  M(2, 0) = 6.0 * n * k.d1 * L2 * L2 * e * e / g;
  M(2, 1) = 3.0 * k.d2 * L2 * g + 6.0 * k.d1 * L2 * L2 * e * e / g;
  M(2, 2) = half + 3.0 * k.d1 * L2 * e * e / g;
  M(2, 3) = 3.0 * k.d2 * L2 * g;
  M(2, 4) = k.d2 * g;
  M(2, 5) = 18.0 * k.d2 * L2 * g / dl;
  M(2, 6) = 6.0 * k.d2 * g / dl;

  M(3, 0) = 2.0 * n * k.tp_x * L2 * e * e;
  M(3, 1) = k.d3 * g * g + 2.0 * k.tp_x * L2 * e * e;
  M(3, 2) = k.tp_x * e * e;
  M(3, 3) = k.d_x + k.d3 * g * g;
  M(3, 5) = 6.0 * k.d3 * g * g / dl;

  M(4, 0) = 6.0 * n * k.tp_y * L2 * L2 * e * e;
  M(4, 1) = 3.0 * k.d4 * L2 * g * g + 6.0 * k.tp_y * L2 * L2 * e * e;
  M(4, 2) = 3.0 * k.tp_y * L2 * e * e + k.d4 * g * g;
  M(4, 3) = 3.0 * k.d4 * L2 * g * g;
  M(4, 4) = k.d_y + k.d4 * g * g;
  M(4, 5) = 18.0 * k.d4 * L2 * g * g / dl;
  M(4, 6) = 6.0 * k.d4 * g * g / dl;

  M(5, 3) = 2.0 * (1.0 - dl) / dl;
  M(5, 5) = 1.0 - dl / 2.0;
  M(6, 4) = 2.0 * (1.0 - dl) / dl;
  M(6, 6) = 1.0 - dl / 2.0;

  sys.gap.resize(7);
  sys.gap(0) = 1.5 * e * k.mu;
  sys.gap(1) = consensus_gap(k);
  sys.gap(2) = consensus_gap(k) - 3.0 * k.d1 * L2 * e * e / g;
  sys.gap(3) = k.one_minus_x - k.d3 * g * g;
  sys.gap(4) = k.one_minus_y - k.d4 * g * g;
  sys.gap(5) = dl / 2.0;
  sys.gap(6) = dl / 2.0;
  sys.one_minus_theta = e * k.mu / 2.0;
  sys.theta = 1.0 - sys.one_minus_theta;
  return sys;
}

double spectral_radius_nonneg(const Mat& m, double tol, int max_iter) {
  const Eigen::Index d = m.rows();
  if (d == 0 || m.cols() != d) throw std::invalid_argument("square matrix required");
  if ((m.array() < 0.0).any()) throw std::invalid_argument("matrix has negative entries");
  // ||M^(2^t)||_inf^(1/2^t) by repeated squaring; every term is >= rho and the
  // sequence converges whatever the gap between the leading eigenvalues is.
  // S_t = M^(2^t) / exp(log_c) keeps the entries near 1.
  Mat S = m;
  double log_c = 0.0, m_t = 1.0, est = std::numeric_limits<double>::infinity();
  const int rounds = std::min(max_iter, 200);
  for (int t = 0; t < rounds; ++t) {
    const double top = S.maxCoeff();
    if (top == 0.0) return 0.0;  // nilpotent
    S /= top;
    log_c += std::log(top);
    const double next = std::exp((log_c + std::log(S.rowwise().sum().maxCoeff())) / m_t);
    if (std::abs(next - est) <= tol * next) return std::min(est, next);
    est = std::min(est, next);
    S = S * S;
    log_c *= 2.0;
    m_t *= 2.0;
  }
  return est;
}

Certificate certify(const ErrorSystem& sys) {
  Certificate c;
  const Eigen::Index d = sys.M.rows();
  c.theta = sys.theta;
  c.rho_M = spectral_radius_nonneg(sys.M);
  c.epsilon = sys.epsilon;
  c.certified_gap = -std::numeric_limits<double>::infinity();
  if (sys.epsilon.size() == d && (sys.epsilon.array() > 0.0).all()) {
    c.margins.resize(d);
    c.componentwise_ok = true;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        if (j != i) off += sys.M(i, j) * sys.epsilon(j);
      const double ei = sys.epsilon(i);
      const double room = (sys.gap(i) - sys.one_minus_theta) * ei;
      c.margins(i) = room - off;
      const double scale = off + (std::abs(sys.gap(i)) + sys.one_minus_theta) * ei;
      if (c.margins(i) < -1e-12 * scale) c.componentwise_ok = false;
      gap = std::min(gap, sys.gap(i) - off / ei);
    }
    c.certified_gap = gap;
  }
  // when rho rounds to 1 the positive Collatz-Wielandt gap still settles it
  c.rho_ok = c.rho_M < 1.0 || c.certified_gap > 0.0;
  return c;
}

namespace {

SufficientParams finish(SufficientParams sp, bool ef) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    sp.consts.gamma = sp.gamma;
    sp.consts.eta = sp.eta;
    sp.system = ef ? build_B(sp.consts) : build_A(sp.consts);
    const double L2 = sp.consts.L * sp.consts.L;
    Vec eps = sp.epsilon_raw;
    eps(2) *= L2;
    eps(4) *= L2;
    if (ef) eps(6) *= L2;
    sp.system.epsilon = eps;
    sp.certificate = certify(sp.system);
    sp.certificate.gamma = sp.gamma;
    sp.certificate.eta = sp.eta;
    if (sp.certificate.ok()) return sp;
    sp.gamma *= 0.9;
    sp.eta *= 0.5;
  }
  throw InfeasibleError("no certified step sizes found");
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v) || !(v > 0.0))
    throw InfeasibleError(std::string("sufficient conditions produced a bad ") + what);
}

}  // namespace

SufficientParams sufficient_params(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                   const CompressorProfile& profile, double alpha_x, double alpha_y) {
  SufficientParams sp;
  auto& k = sp.consts;
  k = make_constants(pc, n, spec, profile, alpha_x, alpha_y, false);
  const double mu = k.mu, L = k.L, s = k.s, kap = k.kappa;

  const double e4 = 1.0, e5 = 1.0;
  const double e2 = kSafety * std::max(2.0 * k.c1 * k.c2 * e4, e4);
  const double m2 = k.c4 * e2 + k.c2 * (3.0 * e4 + e5);
  const double e3 = kSafety * 4.0 * m2 / s;
  const double e1 = kSafety * 3.0 * kap * kap * e2 / n;
  const double m1 = k.c3 * (n * e1 + e2 + e3 / 2.0);
  const double m3 = k.t_x * (2.0 * n * e1 + 2.0 * e2 + e3) + k.c5 * e2 + k.c6 * e4 + e4 / (2.0 * kap);
  const double m4 = 3.0 * k.t_y * (2.0 * n * e1 + 2.0 * e2 + e3) + 3.0 * k.c8 * e2 + k.c8 * e3 +
                    3.0 * k.c7 * e4 + k.c7 * e5 + e5 / (2.0 * kap);

  sp.gamma = std::min({1.0, k.one_minus_x * e4 / m3, k.one_minus_y * e5 / m4});
  require_finite(sp.gamma, "gamma");
  const double g = sp.gamma;
  sp.eta = std::min({mu * e2 * g / (2.0 * k.c1 * L * L * e3), mu * e3 * g / (2.0 * m1), s * g / (4.0 * mu),
                     g / L, 0.99 * std::min(2.0 / (mu + L), 1.0 / (3.0 * mu))});
  require_finite(sp.eta, "eta");
  sp.epsilon_raw.resize(5);
  sp.epsilon_raw << e1, e2, e3, e4, e5;
  return finish(std::move(sp), false);
}

SufficientParams sufficient_params_ef(const ProblemConstants& pc, int n, const SpectralInfo& spec,
                                      const CompressorProfile& profile, double alpha_x, double alpha_y) {
  SufficientParams sp;
  auto& k = sp.consts;
  k = make_constants(pc, n, spec, profile, alpha_x, alpha_y, true);
  const double mu = k.mu, L = k.L, s = k.s, kap = k.kappa, dl = k.delta;

  const double e4 = 1.0, e5 = 1.0;
  const double e6 = kSafety * std::max(8.0 * (1.0 - dl) * e4 / (dl * dl), 1e-6 * e4);
  const double e7 = kSafety * std::max(8.0 * (1.0 - dl) * e5 / (dl * dl), 1e-6 * e5);
  const double e2 =
      kSafety * std::max({4.0 * k.d1 * k.d2 * e4, 24.0 * k.d1 * k.d2 * e6 / dl, e4});
  const double e1 = kSafety * 3.0 * kap * kap * e2 / n;
  const double m2 = 3.0 * k.d2 * e2 + 3.0 * k.d2 * e4 + k.d2 * e5 + 18.0 * k.d2 * e6 / dl +
                    6.0 * k.d2 * e7 / dl;
  const double e3 = kSafety * 4.0 * m2 / s;
  const double m1 = 3.0 * k.d1 * (2.0 * n * e1 + 2.0 * e2 + e3);
  const double m3 = 2.0 * n * k.tp_x * e1 + 2.0 * k.tp_x * e2 + k.tp_x * e3 + k.d3 * e2 + k.d3 * e4 +
                    6.0 * k.d3 * e6 / dl + e4 / (2.0 * kap);
  const double m4 = 6.0 * n * k.tp_y * e1 + 6.0 * k.tp_y * e2 + 3.0 * k.tp_y * e3 + 3.0 * k.d4 * e2 +
                    k.d4 * e3 + 3.0 * k.d4 * e4 + k.d4 * e5 + 18.0 * k.d4 * e6 / dl +
                    6.0 * k.d4 * e7 / dl + e5 / (2.0 * kap);

  sp.gamma = std::min({1.0, k.one_minus_x * e4 / m3, k.one_minus_y * e5 / m4});
  require_finite(sp.gamma, "gamma");
  const double g = sp.gamma;
  sp.eta = std::min({mu * e3 * g / (2.0 * L * L * m1), mu * e2 * g / (2.0 * k.d1 * L * L * e3),
                     s * g / (4.0 * mu), g / L, dl / (2.0 * mu),
                     0.99 * std::min(2.0 / (mu + L), 1.0 / (3.0 * mu))});
  require_finite(sp.eta, "eta");
  sp.epsilon_raw.resize(7);
  sp.epsilon_raw << e1, e2, e3, e4, e5, e6, e7;
  return finish(std::move(sp), true);
}

RateFit fit_log_residual(const std::vector<TraceRecord>& trace, int k_begin, int k_end) {
  RateFit fit;
  fit.k_begin = k_begin;
  fit.k_end = k_begin;
  std::vector<double> xs, ys;
  for (const auto& r : trace) {
    if (r.k < k_begin) continue;
    if (r.k > k_end) break;
    if (!(r.residual >= DBL_MIN) || !std::isfinite(r.residual)) break;
    xs.push_back(r.k);
    ys.push_back(std::log(r.residual));
    fit.k_end = r.k;
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) {
    fit.rate = fit.slope = fit.intercept = fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double mx = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= fit.points;
  my /= fit.points;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.rate = std::exp(fit.slope);
  double ss_res = 0;
  for (int i = 0; i < fit.points; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

RateFit empirical_rate(const std::vector<TraceRecord>& trace) {
  if (trace.empty()) return fit_log_residual(trace, 0, 0);
  const int k_end = trace.back().k;
  const int k_begin = (k_end + 9) / 10;
  return fit_log_residual(trace, k_begin, k_end);
}

std::string certificate_json(const SufficientParams& sp) {
  using nlohmann::json;
  const auto& k = sp.consts;
  auto vec = [](const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  json mat = json::array();
  for (Eigen::Index i = 0; i < sp.system.M.rows(); ++i) mat.push_back(vec(sp.system.M.row(i).transpose()));
  json j;
  j["variant"] = k.error_feedback ? "error-feedback" : "plain";
  j["gamma"] = sp.gamma;
  j["eta"] = sp.eta;
  j["theta"] = sp.certificate.theta;
  j["one_minus_theta"] = sp.system.one_minus_theta;
  j["rho_M"] = sp.certificate.rho_M;
  j["certified_gap"] = sp.certificate.certified_gap;
  j["componentwise_ok"] = sp.certificate.componentwise_ok;
  j["rho_ok"] = sp.certificate.rho_ok;
  j["epsilon"] = vec(sp.system.epsilon);
  j["epsilon_raw"] = vec(sp.epsilon_raw);
  j["margins"] = vec(sp.certificate.margins);
  j["gap"] = vec(sp.system.gap);
  j["M"] = mat;
  j["constants"] = {{"mu", k.mu},       {"L", k.L},         {"kappa", k.kappa},
                    {"s", k.s},         {"norm_IminusW", k.norm_IminusW},
                    {"C", k.C},         {"delta", k.delta}, {"r", k.r},
                    {"alpha_x", k.alpha_x}, {"alpha_y", k.alpha_y},
                    {"tau_x", k.tau_x}, {"tau_y", k.tau_y}};
  if (k.error_feedback) {
    j["constants"].update({{"d1", k.d1}, {"d2", k.d2}, {"d3", k.d3}, {"d4", k.d4}, {"d_x", k.d_x},
                           {"d_y", k.d_y}, {"tp_x", k.tp_x}, {"tp_y", k.tp_y}});
  } else {
    j["constants"].update({{"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3}, {"c4", k.c4}, {"c5", k.c5},
                           {"c6", k.c6}, {"c7", k.c7}, {"c8", k.c8}, {"c_x", k.c_x}, {"c_y", k.c_y},
                           {"t_x", k.t_x}, {"t_y", k.t_y}});
  }
  return j.dump(2);
}

double gt_spectral_radius(const RidgeProblem& pb, const Mat& w, double eta, double gamma) {
  const int n = pb.n, p = pb.p, N = n * p;
  if (w.rows() != n || w.cols() != n) throw std::invalid_argument("weight matrix must be n x n");
  const Mat I = Mat::Identity(N, N);
  Mat wg = Mat::Zero(N, N), h = Mat::Zero(N, N);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = gamma * w(i, j) + (i == j ? 1.0 - gamma : 0.0);
      if (a != 0.0) wg.block(i * p, j * p, p, p) = a * Mat::Identity(p, p);
    }
    h.block(i * p, i * p, p, p) =
        2.0 * pb.u.row(i).transpose() * pb.u.row(i) + 2.0 * pb.rho * Mat::Identity(p, p);
  }
  Mat t(2 * N, 2 * N);
  t << wg, -eta * I, h * (wg - I), wg - eta * h;
  // the tracking constraint 1'Y - 1'H X = 0 is invariant under T
  Mat s = Mat::Zero(N, p);
  for (int i = 0; i < n; ++i) s.block(i * p, 0, p, p) = Mat::Identity(p, p);
  Mat c(p, 2 * N);
  c << -(s.transpose() * h), s.transpose();
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  const Mat q = svd.matrixV().rightCols(2 * N - p);
  Eigen::EigenSolver<Mat> es(q.transpose() * t * q, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace cgt
