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

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cgt/harness.h"

namespace cgt {
namespace {

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Mat full_gradient(const RidgeProblem& pb, const Mat& x) {
  Mat g(pb.n, pb.p);
  for (int i = 0; i < pb.n; ++i) g.row(i) = local_gradient(pb, i, x.row(i).transpose()).transpose();
  return g;
}

double rel_dev(const Mat& a, const Mat& b) {
  const double scale = std::max({a.norm(), b.norm(), DBL_MIN});
  return (a - b).norm() / scale;
}

}  // namespace

InvariantStats invariant_stats(Algorithm a, const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                               const CompressorKind& kind, int K, std::uint64_t seed, std::uint64_t x0_seed) {
  if (!hp.eta_agents.empty()) throw std::invalid_argument("mean dynamics check needs a shared eta");
  Simulator sim(pb, w, hp, a, kind, seed, random_initial_point(pb.n, pb.p, x0_seed));
  InvariantStats st;
  auto tracking = [&](const NetworkState& s) {
    const Mat g = full_gradient(pb, s.X);
    const Vec gap = (s.Y.colwise().sum() - g.colwise().sum()).transpose();
    return gap.cwiseAbs().maxCoeff() / (1.0 + g.norm());
  };
  st.tracking = tracking(sim.state());
  for (int k = 0; k < K; ++k) {
    const Vec xbar = sim.state().X.colwise().mean().transpose();
    const Vec ybar = sim.state().Y.colwise().mean().transpose();
    sim.step();
    const Vec xbar1 = sim.state().X.colwise().mean().transpose();
    st.mean_dynamics = std::max(st.mean_dynamics, (xbar1 - xbar + hp.eta * ybar).norm() / (1.0 + xbar.norm()));
    st.tracking = std::max(st.tracking, tracking(sim.state()));
    ++st.steps;
  }
  return st;
}

double equivalence_deviation(Algorithm ref, Algorithm eff, const RidgeProblem& pb, const WeightMatrix& w,
                             const HyperParams& hp, const CompressorKind& kind, int K, std::uint64_t seed,
                             std::uint64_t x0_seed) {
  const Mat x0 = random_initial_point(pb.n, pb.p, x0_seed);
  Simulator a(pb, w, hp, ref, kind, seed, x0), b(pb, w, hp, eff, kind, seed, x0);
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    a.step();
    b.step();
    worst = std::max({worst, rel_dev(a.state().X, b.state().X), rel_dev(a.state().Y, b.state().Y)});
  }
  return worst;
}

double perturbation_deviation(Algorithm a, const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, int K, std::uint64_t seed, std::uint64_t x0_seed,
                              double bump) {
  const Mat x0 = random_initial_point(pb.n, pb.p, x0_seed);
  Mat x1 = x0;
  x1(0, 0) += bump;
  Simulator s0(pb, w, hp, a, kind, seed, x0), s1(pb, w, hp, a, kind, seed, x1);
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    s0.step();
    s1.step();
    worst = std::max({worst, rel_dev(s0.state().X, s1.state().X), rel_dev(s0.state().Y, s1.state().Y)});
  }
  return worst;
}

CollapseStats identity_collapse(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, int K,
                                std::uint64_t seed, std::uint64_t x0_seed) {
  const Mat x0 = random_initial_point(pb.n, pb.p, x0_seed);
  Simulator gt(pb, w, hp, Algorithm::kGt, Identity{}, seed, x0);
  Simulator cref(pb, w, hp, Algorithm::kCgtReference, Identity{}, seed, x0);
  Simulator ceff(pb, w, hp, Algorithm::kCgtEfficient, Identity{}, seed, x0);
  Simulator eref(pb, w, hp, Algorithm::kEfcgtReference, Identity{}, seed, x0);
  Simulator eeff(pb, w, hp, Algorithm::kEfcgtEfficient, Identity{}, seed, x0);
  CollapseStats st;
  st.gt_bitwise = true;
  for (int k = 0; k < K; ++k) {
    for (Simulator* s : {&gt, &cref, &ceff, &eref, &eeff}) s->step();
    for (const Simulator* s : {&cref, &ceff})
      if (s->state().X != gt.state().X || s->state().Y != gt.state().Y) st.gt_bitwise = false;
    for (const Simulator* s : {&eref, &eeff})
      st.max_ef_error = std::max({st.max_ef_error, s->state().Ex.cwiseAbs().maxCoeff(),
                                  s->state().Ey.cwiseAbs().maxCoeff()});
  }
  return st;
}

std::vector<CheckResult> verify_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail, bool expected_failure = false) {
    out.push_back({std::move(name), ok, expected_failure, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("threw: ") + e.what());
    }
  };

  TopologySpec und, dir;
  dir.directed = true;
  ProblemSpec ps;
  ps.seed = seed;
  const RidgeProblem pb = build_problem(ps);

  for (const auto* t : {&und, &dir}) {
    const std::string name = std::string("weights.") + (t->directed ? "directed" : "undirected") + "-ring";
    guarded(name, [&] {
      const WeightMatrix w = build_weights(*t);
      const double err = std::max(w.max_row_sum_error(), w.max_col_sum_error());
      add(name, err <= 1e-12, "max row/column sum error " + fmt("%.3e", err));
    });
  }

  guarded("weights.fault-injection", [&] {
    Mat d = build_weights(dir).dense();
    d(3, 3) += 1e-3;
    d(3, 4) -= 1e-3;  // row 3 still sums to 1, column 3 does not
    try {
      WeightMatrix::FromDense(d);
      add("weights.fault-injection", false, "corrupted column was accepted");
    } catch (const StochasticityError& e) {
      const bool ok = e.axis() == StochasticityError::Axis::kColumn && e.index() == 3;
      add("weights.fault-injection", ok, e.what());
    }
  });

  const std::vector<std::string> comps = {"identity", "quant:b=2,q=inf", "topk:k=1", "randk:k=1", "normsign:q=inf"};
  const std::vector<Algorithm> algs = {Algorithm::kCgtReference, Algorithm::kCgtEfficient, Algorithm::kEfcgtReference,
                                       Algorithm::kEfcgtEfficient};
  const WeightMatrix wu = build_weights(und), wd = build_weights(dir);
  HyperParams hp;
  hp.eta = 0.01;
  hp.gamma = 0.5;
  hp.alpha_x = hp.alpha_y = 0.5;
  for (const auto& c : comps) {
    const CompressorKind kind = parse_compressor(c);
    for (Algorithm a : algs) {
      const std::string name = "invariants." + to_string(a) + "." + c;
      guarded(name, [&] {
        const InvariantStats st = invariant_stats(a, pb, wd, hp, kind, 200, seed, seed);
        add(name, st.tracking <= 1e-9 && st.mean_dynamics <= 1e-12,
            "tracking " + fmt("%.2e", st.tracking) + ", mean dynamics " + fmt("%.2e", st.mean_dynamics));
      });
    }
  }

  for (const auto& c : comps) {
    const CompressorKind kind = parse_compressor(c);
    HyperParams hq = hp;
    hq.alpha_x = hq.alpha_y = std::min(1.0, 1.0 / resolve_profile(kind, pb.p, 2000, seed).r);
    for (auto [ref, eff] : {std::pair{Algorithm::kCgtReference, Algorithm::kCgtEfficient},
                            std::pair{Algorithm::kEfcgtReference, Algorithm::kEfcgtEfficient}}) {
      const std::string name = "equivalence." + to_string(eff) + "." + c;
      guarded(name, [&] {
        const double dev = equivalence_deviation(ref, eff, pb, wu, hq, kind, 200, seed, seed);
        std::string detail = "max relative deviation " + fmt("%.2e", dev);
        if (dev > 1e-6)
          detail += ", reference vs itself with x0 moved by 1e-15: " +
                    fmt("%.2e", perturbation_deviation(ref, pb, wu, hq, kind, 200, seed, seed));
        add(name, dev <= 1e-6, detail);
      });
    }
  }

  guarded("identity-collapse", [&] {
    const CollapseStats st = identity_collapse(pb, wu, hp, 200, seed, seed);
    add("identity-collapse", st.gt_bitwise && st.max_ef_error == 0.0,
        std::string(st.gt_bitwise ? "bitwise equal to GT" : "differs from GT") + ", max |E| " +
            fmt("%.2e", st.max_ef_error));
  });

  for (const auto& c : {"topk:k=1", "randk:k=1", "normsign:q=inf", "normsign:q=2", "normsign:q=1",
                        "normsign-rescaled:q=inf"}) {
    const std::string name = std::string("compressor-bound.") + c;
    guarded(name, [&] {
      const CompressorKind kind = parse_compressor(c);
      const auto prof = *analytic_profile(kind, pb.p);
      RngStream rng(seed);
      const BoundEstimate v = estimate_variance_ratio(kind, pb.p, 1000, rng);
      const BoundEstimate k = estimate_contraction(kind, prof.r, pb.p, 1000, rng);
      const bool ok = v.ratio <= prof.C + 3.0 * v.std_error + 1e-12 &&
                      k.ratio <= 1.0 - prof.delta + 3.0 * k.std_error + 1e-12;
      add(name, ok,
          "variance " + fmt("%.4g", v.ratio) + " vs C " + fmt("%.4g", prof.C) + ", contraction " +
              fmt("%.4g", k.ratio) + " vs " + fmt("%.4g", 1.0 - prof.delta));
    });
  }

  const ProblemConstants pc = constants(pb);
  for (const auto& c : {"identity", "topk:k=1"}) {
    for (bool ef : {false, true}) {
      const std::string name = std::string("certificate.") + (ef ? "ef." : "") + c;
      guarded(name, [&] {
        const auto prof = *analytic_profile(parse_compressor(c), pb.p);
        const SufficientParams sp = ef ? sufficient_params_ef(pc, pb.n, spectral_info(wu), prof, 1.0, 1.0)
                                       : sufficient_params(pc, pb.n, spectral_info(wu), prof, 1.0, 1.0);
        add(name, sp.certificate.ok(),
            "gamma " + fmt("%.3e", sp.gamma) + ", eta " + fmt("%.3e", sp.eta) + ", certified gap " +
                fmt("%.3e", sp.certificate.certified_gap));
      });
    }
  }

  guarded("divergence-guard", [&] {
    HyperParams big;
    big.eta = 0.1;
    big.gamma = 1.0;
    RunOptions opts;
    opts.K = 5000;
    opts.trace_every = 100;
    opts.seed = seed;
    opts.x0_seed = seed;
    const RunResult r = run(Algorithm::kCgtEfficient, pb, wd, big, TopK{1}, opts);
    add("divergence-guard", r.diverged, r.diverged ? r.diagnostic : "run did not diverge", true);
  });
  return out;
}

}  // namespace cgt
