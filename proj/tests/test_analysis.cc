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

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "cgt/algorithms.h"
#include "cgt/analysis.h"
#include "doctest.h"
#include "json.hpp"

using namespace cgt;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ProblemConstants toy_constants() {
  ProblemConstants pc;
  pc.mu = 0.02;
  pc.L = 1.5;
  pc.L_i = {1.5};
  pc.kappa = pc.L / pc.mu;
  return pc;
}

SpectralInfo toy_spectrum() {
  SpectralInfo s;
  s.rho_w = 0.9;
  s.s = 0.1;
  s.norm_IminusW = 1.2;
  return s;
}

double eig_radius(const Mat& m) { return m.eigenvalues().cwiseAbs().maxCoeff(); }

ErrorSystem plain_system(Mat m, Vec eps, double theta) {
  ErrorSystem sys;
  sys.gap = Vec::Ones(m.rows()) - m.diagonal();
  sys.M = std::move(m);
  sys.epsilon = std::move(eps);
  sys.theta = theta;
  sys.one_minus_theta = 1.0 - theta;
  return sys;
}

std::vector<TraceRecord> geometric(double r, int K, double scale = 1.0) {
  std::vector<TraceRecord> t;
  for (int k = 0; k <= K; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.residual = scale * std::pow(r, k);
    t.push_back(rec);
  }
  return t;
}

}  // namespace

TEST_CASE("constants by hand") {
  const ProblemConstants pc = toy_constants();
  const SpectralInfo sp = toy_spectrum();
  const CompressorProfile prof{0.3, 0.4, 1.0, Provenance::kAnalytic};
  const ErrorSystemConstants k = make_constants(pc, 10, sp, prof, 0.5, 1.0, false);
  const double w2 = 1.44;
  // alpha r delta = 0.2 and 0.4, tau at the midpoint
  CHECK(k.tau_x == doctest::Approx(1.0 / std::sqrt(0.8)));
  CHECK(k.c_x == doctest::Approx(std::sqrt(0.8)));
  CHECK(k.c_y == doctest::Approx(std::sqrt(0.6)));
  CHECK(k.one_minus_x == doctest::Approx(1.0 - std::sqrt(0.8)));
  CHECK(k.t_x == doctest::Approx(3.0 * k.tau_x / (k.tau_x - 1.0)));
  CHECK(k.c1 == doctest::Approx(20.0));
  CHECK(k.c2 == doctest::Approx(2.0 * 0.3 * w2 / 0.1));
  CHECK(k.c3 == doctest::Approx(12.0 * 2.25 / 0.1));
  CHECK(k.c4 == doctest::Approx(6.0 * w2 / 0.1));
  CHECK(k.c5 == doctest::Approx(k.t_x * w2));
  CHECK(k.c6 == doctest::Approx(k.t_x * 0.3 * w2));
  CHECK(k.c7 == doctest::Approx(k.t_y * 0.3 * w2));
  CHECK(k.c8 == doctest::Approx(k.t_y * w2));
  CHECK(k.kappa == doctest::Approx(75.0));

  const ErrorSystemConstants e = make_constants(pc, 10, sp, prof, 0.5, 1.0, true);
  CHECK(e.d1 == doctest::Approx(20.0));
  CHECK(e.d2 == doctest::Approx(2.0 * w2 / 0.1));
  CHECK(e.d_x == doctest::Approx(std::sqrt(0.8)));
  CHECK(e.d3 == doctest::Approx(e.tp_x * w2));
  CHECK(e.d4 == doctest::Approx(e.tp_y * w2));

  // alpha r delta = 1 pins tau to 2
  const ErrorSystemConstants one = make_constants(pc, 10, sp, {0.0, 1.0, 1.0}, 1.0, 1.0, false);
  CHECK(one.tau_x == 2.0);
  CHECK(one.c_x == 0.0);
  CHECK(one.t_x == doctest::Approx(6.0));

  const ErrorSystemConstants fixed = make_constants(pc, 10, sp, prof, 0.5, 1.0, false, 1.1, 1.2);
  CHECK(fixed.c_x == doctest::Approx(1.1 * 0.8));
  CHECK(fixed.c_y == doctest::Approx(1.2 * 0.6));
}

TEST_CASE("small eta limit of A and the delta = 1 rows of B") {
  const ProblemConstants pc = toy_constants();
  const SpectralInfo sp = toy_spectrum();
  ErrorSystemConstants k = make_constants(pc, 10, sp, {0.3, 0.4, 1.0}, 0.5, 0.5, false);
  k.gamma = 0.7;
  k.eta = 1e-14;
  const Mat A = build_A(k).M;
  const double rt = 1.0 - 0.07, half = (1.0 + rt * rt) / 2.0;
  CHECK(A(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(A(0, 1)) < 1e-9);
  for (int j = 2; j < 5; ++j) CHECK(A(0, j) == 0.0);
  CHECK(A(1, 1) == doctest::Approx(half));
  CHECK(A(2, 2) == doctest::Approx(half));
  CHECK(A(3, 3) == doctest::Approx(k.c_x + k.c6 * 0.49));
  CHECK(A(4, 4) == doctest::Approx(k.c_y + k.c7 * 0.49));

  ErrorSystemConstants e = make_constants(pc, 10, sp, {0.0, 1.0, 1.0}, 1.0, 1.0, true);
  e.gamma = 0.7;
  e.eta = 0.01;
  const Mat B = build_B(e).M;
  CHECK(B.rows() == 7);
  for (int i : {5, 6}) {
    for (int j = 0; j < 7; ++j) CHECK(B(i, j) == (i == j ? 0.5 : 0.0));
  }
  CHECK((B.array() >= 0.0).all());

  ErrorSystemConstants e2 = make_constants(pc, 10, sp, {0.0, 0.25, 1.0}, 1.0, 1.0, true);
  e2.gamma = 0.7;
  e2.eta = 0.01;
  const Mat B2 = build_B(e2).M;
  CHECK(B2(5, 3) == doctest::Approx(6.0));
  CHECK(B2(5, 5) == doctest::Approx(0.875));
}

TEST_CASE("entries are nonnegative and grow with C") {
  const ProblemConstants pc = toy_constants();
  const SpectralInfo sp = toy_spectrum();
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double C = 2.0 * U(g), dC = U(g), delta = 0.05 + 0.95 * U(g);
    const double ax = 0.1 + 0.9 * U(g), ay = 0.1 + 0.9 * U(g);
    ErrorSystemConstants a = make_constants(pc, 10, sp, {C, delta, 1.0}, ax, ay, false);
    ErrorSystemConstants b = make_constants(pc, 10, sp, {C + dC, delta, 1.0}, ax, ay, false);
    a.gamma = b.gamma = 0.05 + 0.95 * U(g);
    a.eta = b.eta = 0.5 * U(g) + 1e-6;
    const Mat ma = build_A(a).M, mb = build_A(b).M;
    CHECK((ma.array() >= 0.0).all());
    CHECK((mb.array() >= ma.array()).all());

    ErrorSystemConstants e = make_constants(pc, 10, sp, {C, delta, 1.0}, ax, ay, true);
    ErrorSystemConstants f = make_constants(pc, 10, sp, {C, std::min(1.0, delta + 0.1), 1.0}, ax, ay, true);
    CHECK(f.d_x <= e.d_x);
    CHECK(f.d_y <= e.d_y);
    e.gamma = a.gamma;
    e.eta = a.eta;
    CHECK((build_B(e).M.array() >= 0.0).all());
  }
}

TEST_CASE("preconditions") {
  const ProblemConstants pc = toy_constants();
  const SpectralInfo sp = toy_spectrum();
  ErrorSystemConstants k = make_constants(pc, 10, sp, {0.3, 0.4, 1.0}, 0.5, 0.5, false);
  k.gamma = 0.5;
  k.eta = 2.0 / (pc.mu + pc.L);
  CHECK_THROWS_WITH_AS(build_A(k), doctest::Contains("eta"), std::invalid_argument);
  k.eta = 0.01;
  k.gamma = 1.5;
  CHECK_THROWS_AS(build_A(k), std::invalid_argument);
  CHECK_THROWS_AS(build_B(k), std::invalid_argument);
  // alpha r delta above 1
  CHECK_THROWS_AS(make_constants(pc, 10, sp, {0.3, 0.4, 5.0}, 1.0, 1.0, false), InfeasibleError);
  // a fixed tau with a weak compressor leaves c_x above 1
  CHECK_THROWS_AS(make_constants(pc, 10, sp, {0.3, 1e-3, 1.0}, 1.0, 1.0, false, 2.0, 2.0), InfeasibleError);
  CHECK_THROWS_AS(make_constants(pc, 10, sp, {0.3, 0.0, 1.0}, 1.0, 1.0, false), std::invalid_argument);
  CHECK_THROWS_AS(make_constants(pc, 10, sp, {0.3, 0.5, 2.0}, 0.5, 0.5, true), std::invalid_argument);
}

TEST_CASE("certify on small matrices") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = 0.3;
  const Certificate a = certify(plain_system(d, Vec::Ones(2), 0.5));
  CHECK(a.rho_M == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(a.componentwise_ok);

  Mat c(2, 2);
  c << 0.5, 0.1, 0.1, 0.5;
  const Certificate b = certify(plain_system(c, Vec::Ones(2), 0.6));
  CHECK(b.rho_M == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(b.componentwise_ok);
  CHECK_FALSE(certify(plain_system(c, Vec::Ones(2), 0.59)).componentwise_ok);
  CHECK_FALSE(certify(plain_system(c, Vec::Zero(2), 0.6)).componentwise_ok);
}

TEST_CASE("power iteration agrees with a full eigensolve") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 6;
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = U(g) < 0.3 ? 0.0 : U(g);
    const double want = eig_radius(m);
    CHECK(spectral_radius_nonneg(m) == doctest::Approx(want).epsilon(1e-9));
  }
  Mat neg = Mat::Identity(2, 2);
  neg(0, 1) = -0.1;
  CHECK_THROWS_AS(spectral_radius_nonneg(neg), std::invalid_argument);
}

TEST_CASE("componentwise test implies the radius bound") {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 6;
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = U(g);
    Vec eps(d);
    for (int i = 0; i < d; ++i) eps(i) = 0.1 + U(g);
    const double theta = (m * eps).cwiseQuotient(eps).maxCoeff();
    const Certificate c = certify(plain_system(m, eps, theta));
    CHECK(c.componentwise_ok);
    CHECK(eig_radius(m) <= theta + 1e-10);
  }
}

TEST_CASE("sufficient parameters certify") {
  const RidgeProblem pb = generate_ridge(10, 20, 0.01, 5.0, 5);
  const ProblemConstants pc = constants(pb);
  const SpectralInfo spec = spectral_info(build_weights_outdegree(build_ring(10, false), {0.1}));

  const SufficientParams id = sufficient_params(pc, 10, spec, {0.0, 1.0, 1.0}, 1.0, 1.0);
  CHECK(id.gamma > 0.0);
  CHECK(id.gamma <= 1.0);
  CHECK(id.eta > 0.0);
  CHECK(id.certificate.ok());
  CHECK((id.system.epsilon.array() > 0.0).all());
  CHECK(id.certificate.rho_M <= id.certificate.theta + 1e-10);

  const CompressorProfile quant = resolve_profile(UnbiasedQuantize{2, kInf}, 20, 2000, 1);
  const SufficientParams q = sufficient_params(pc, 10, spec, quant, 1.0 / quant.r, 1.0 / quant.r);
  CHECK(q.certificate.ok());

  const CompressorProfile top = *analytic_profile(TopK{1}, 20);
  const SufficientParams t = sufficient_params_ef(pc, 10, spec, top, 1.0, 1.0);
  CHECK(t.certificate.ok());
  CHECK(t.system.M.rows() == 7);
  CHECK(t.epsilon_raw(5) >= 8.0 * (1.0 - top.delta) * t.epsilon_raw(3) / (top.delta * top.delta));

  const SufficientParams one = sufficient_params_ef(pc, 10, spec, {0.0, 1.0, 1.0}, 1.0, 1.0);
  CHECK(one.certificate.ok());

  const auto js = nlohmann::json::parse(certificate_json(t));
  CHECK(js["gamma"].get<double>() == t.gamma);
  CHECK(js["M"].size() == 7);
}

TEST_CASE("certified parameters run at least as fast as promised") {
  const RidgeProblem pb = generate_ridge(10, 20, 0.01, 5.0, 5);
  const WeightMatrix w = build_weights_outdegree(build_ring(10, false), {0.1});
  const SufficientParams sp = sufficient_params(constants(pb), 10, spectral_info(w), {0.0, 1.0, 1.0}, 1.0, 1.0);
  HyperParams hp;
  hp.gamma = sp.gamma;
  hp.eta = sp.eta;
  RunOptions o;
  o.K = 2000;
  o.trace_every = 10;
  const RunResult r = run(Algorithm::kCgtEfficient, pb, w, hp, Identity{}, o);
  const RateFit fit = empirical_rate(r.trace);
  CHECK(fit.rate <= sp.certificate.theta + 0.05);
}

TEST_CASE("log-linear fits") {
  const RateFit a = empirical_rate(geometric(0.9, 200, 3.0));
  CHECK(a.rate == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.k_begin == 20);

  const RateFit c = empirical_rate(geometric(1.0, 100, 0.5));
  CHECK(c.rate == doctest::Approx(1.0));

  auto t = geometric(0.5, 2000);  // underflows well before the end
  const RateFit z = fit_log_residual(t, 0, 2000);
  CHECK(z.rate == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(z.k_end < 1100);

  const RateFit w = fit_log_residual(geometric(0.8, 100), 30, 60);
  CHECK(w.points == 31);
  CHECK(w.rate == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("GT spectral radius matches the simulated decay") {
  const RidgeProblem pb = generate_ridge(4, 3, 0.05, 1.0, 2);
  const WeightMatrix w = build_weights_outdegree(build_ring(4, true), {0.3});
  const Vec xs = optimal_solution(pb).x_star;
  for (double eta : {0.05, 0.2}) {
    const double rho = gt_spectral_radius(pb, w.dense(), eta, 0.8);
    HyperParams hp;
    hp.eta = eta;
    hp.gamma = 0.8;
    Simulator sim(pb, w, hp, Algorithm::kGt, Identity{}, 1, random_initial_point(4, 3, 3));
    auto err = [&] {
      const Mat dx = sim.state().X.rowwise() - xs.transpose();
      return std::sqrt(dx.squaredNorm() + sim.state().Y.squaredNorm());
    };
    for (int k = 0; k < 200; ++k) sim.step();
    const double e0 = err();
    for (int k = 0; k < 400; ++k) sim.step();
    const double observed = std::pow(err() / e0, 1.0 / 400.0);
    INFO("eta ", eta);
    CHECK(observed == doctest::Approx(rho).epsilon(2e-3));
  }
}
