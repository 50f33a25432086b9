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

#include "cgt/algorithms.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cgt/kernels.h"

namespace cgt {

namespace {

double dist_to_optimum(const Mat& x, const Vec& x_star) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += (x.row(i).transpose() - x_star).squaredNorm();
  return s;
}

double spread(const Mat& m) {
  Eigen::RowVectorXd mean = m.colwise().mean();
  return (m.rowwise() - mean).squaredNorm();
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "gt") return Algorithm::kGt;
  if (name == "cgt-ref") return Algorithm::kCgtReference;
  if (name == "cgt") return Algorithm::kCgtEfficient;
  if (name == "efcgt-ref") return Algorithm::kEfcgtReference;
  if (name == "efcgt") return Algorithm::kEfcgtEfficient;
  throw std::invalid_argument("unknown algorithm '" + name + "' (gt, cgt, cgt-ref, efcgt, efcgt-ref)");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kGt: return "gt";
    case Algorithm::kCgtReference: return "cgt-ref";
    case Algorithm::kCgtEfficient: return "cgt";
    case Algorithm::kEfcgtReference: return "efcgt-ref";
    case Algorithm::kEfcgtEfficient: return "efcgt";
  }
  return "?";
}

bool uses_error_feedback(Algorithm a) {
  return a == Algorithm::kEfcgtReference || a == Algorithm::kEfcgtEfficient;
}

Vec HyperParams::eta_vector(int n) const {
  if (eta_agents.empty()) return Vec::Constant(n, eta);
  return Eigen::Map<const Vec>(eta_agents.data(), static_cast<Eigen::Index>(eta_agents.size()));
}

void HyperParams::validate(int n) const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(eta > 0.0 && std::isfinite(eta), "eta must be > 0");
  need(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  need(alpha_x > 0.0 && alpha_x <= 1.0, "alpha_x must lie in (0, 1]");
  need(alpha_y > 0.0 && alpha_y <= 1.0, "alpha_y must lie in (0, 1]");
  need(beta_x > 0.0 && beta_x <= 1.0, "beta_x must lie in (0, 1]");
  need(beta_y > 0.0 && beta_y <= 1.0, "beta_y must lie in (0, 1]");
  if (!eta_agents.empty()) {
    need(static_cast<int>(eta_agents.size()) == n, "eta_agents needs one entry per agent");
    for (double e : eta_agents) need(e > 0.0 && std::isfinite(e), "per-agent eta must be > 0");
  }
}

std::vector<std::string> hyper_warnings(const HyperParams& hp, const CompressorProfile& profile) {
  std::vector<std::string> out;
  const double cap = 1.0 / profile.r;
  auto check = [&](double a, const char* name) {
    if (a > cap * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << name << " = " << a << " exceeds 1/r = " << cap << "; convergence is not covered by the bounds";
      out.push_back(os.str());
    }
  };
  check(hp.alpha_x, "alpha_x");
  check(hp.alpha_y, "alpha_y");
  return out;
}

AgentState agent_state(const NetworkState& s, int i) {
  auto row = [i](const Mat& m) -> Vec {
    if (m.rows() == 0) return Vec();
    return m.row(i).transpose();
  };
  return {row(s.X), row(s.Y), row(s.Hx), row(s.Hy), row(s.Hxw), row(s.Hyw), row(s.Ex), row(s.Ey), row(s.G)};
}

TraceRecord metrics(const NetworkState& s, const Vec& x_star, double initial_distance, int k,
                    std::int64_t bits) {
  TraceRecord r;
  r.k = k;
  double d = dist_to_optimum(s.X, x_star);
  r.residual = initial_distance > 0.0 ? d / initial_distance : d;
  r.opt_error = (s.X.colwise().mean().transpose() - x_star).squaredNorm();
  r.consensus_error = spread(s.X);
  r.tracking_error = spread(s.Y);
  r.compress_error_x = (s.X - s.Hx).squaredNorm();
  r.compress_error_y = (s.Y - s.Hy).squaredNorm();
  r.ef_error_x = s.Ex.squaredNorm();
  r.ef_error_y = s.Ey.squaredNorm();
  r.bits_sent = bits;
  return r;
}

Simulator::Simulator(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, Algorithm algorithm,
                     const CompressorKind& kind, std::uint64_t seed, const Mat& x0, ExecutionPolicy policy)
    : pb_(&pb), w_(&w), hp_(hp), algorithm_(algorithm), kind_(kind), seed_(seed), policy_(policy) {
  const int n = pb.n, p = pb.p;
  if (w.n() != n) throw std::invalid_argument("weight matrix has " + std::to_string(w.n()) +
                                              " agents, problem has " + std::to_string(n));
  if (x0.rows() != n || x0.cols() != p) throw std::invalid_argument("x0 must be n x p");
  hp_.validate(n);
  bit_cost(kind_, p);  // validates k <= p etc.
  eta_ = hp_.eta_vector(n);
  s_.X = x0;
  kernels::gradients(pb, s_.X, s_.G, policy_);
  s_.Y = s_.G;
  s_.Hx = Mat::Zero(n, p);
  s_.Hy = Mat::Zero(n, p);
  s_.Ex = Mat::Zero(n, p);
  s_.Ey = Mat::Zero(n, p);
  if (algorithm_ == Algorithm::kCgtEfficient || algorithm_ == Algorithm::kEfcgtEfficient) {
    kernels::mix_rows(w, s_.Hx, s_.Hxw, policy_);
    kernels::mix_rows(w, s_.Hy, s_.Hyw, policy_);
  } else {
    s_.Hxw = Mat::Zero(n, p);
    s_.Hyw = Mat::Zero(n, p);
  }
}

std::int64_t Simulator::bits_per_round() const {
  const std::int64_t n = pb_->n;
  // The reference listings are the same protocol written in matrix form, so
  // they are charged for the compressed messages the agents would send.
  switch (algorithm_) {
    case Algorithm::kGt:
      return n * 2 * bit_cost(Identity{}, pb_->p);
    case Algorithm::kCgtReference:
    case Algorithm::kCgtEfficient:
      return n * 2 * bit_cost(kind_, pb_->p);
    case Algorithm::kEfcgtReference:
    case Algorithm::kEfcgtEfficient:
      return n * 4 * bit_cost(kind_, pb_->p);
  }
  return 0;
}

void Simulator::step() {
  switch (algorithm_) {
    case Algorithm::kGt: step_gt(); break;
    case Algorithm::kCgtReference: step_cgt_reference(); break;
    case Algorithm::kCgtEfficient: step_cgt_efficient(); break;
    case Algorithm::kEfcgtReference: step_efcgt_reference(); break;
    case Algorithm::kEfcgtEfficient: step_efcgt_efficient(); break;
  }
  bits_ += bits_per_round();
  ++k_;
}

void Simulator::finish_round(const Mat& xa, const Mat& xb, const Mat& ya, const Mat& yb) {
  const int n = pb_->n, p = pb_->p;
  const double g = hp_.gamma;
  kernels::consensus_update(s_.X, xa, xb, s_.Y, g, eta_, xn_, policy_);
  kernels::gradients(*pb_, xn_, gn_, policy_);
  yn_.resize(n, p);
  kernels::for_each_agent(policy_, n, [&](int i) {
    for (int c = 0; c < p; ++c) yn_(i, c) = s_.Y(i, c) - g * (ya(i, c) - yb(i, c)) + gn_(i, c) - s_.G(i, c);
  });
  s_.X.swap(xn_);
  s_.Y.swap(yn_);
  s_.G.swap(gn_);
}

void Simulator::step_gt() {
  kernels::mix_rows(*w_, s_.X, mix_x_, policy_);
  kernels::mix_rows(*w_, s_.Y, mix_y_, policy_);
  finish_round(s_.X, mix_x_, s_.Y, mix_y_);
}

void Simulator::step_cgt_reference() {
  const int n = pb_->n;
  const bool exact = is_exact(kind_);
  auto comm = [&](const Mat& z_src, Mat& h, double alpha, RngTag tag, Mat& hat) {
    z_ = z_src - h;
    kernels::compress_rows(kind_, z_, seed_, static_cast<std::uint64_t>(k_), tag, q_, policy_);
    hat.resize(z_.rows(), z_.cols());
    kernels::for_each_agent(policy_, n, [&](int i) {
      if (exact)
        hat.row(i) = z_src.row(i);
      else
        hat.row(i) = h.row(i) + q_.row(i);
      h.row(i) = (1.0 - alpha) * h.row(i) + alpha * hat.row(i);
    });
  };
  comm(s_.X, s_.Hx, hp_.alpha_x, RngTag::kXDiff, xhat_);
  comm(s_.Y, s_.Hy, hp_.alpha_y, RngTag::kYDiff, yhat_);
  kernels::mix_rows(*w_, xhat_, mix_x_, policy_);
  kernels::mix_rows(*w_, yhat_, mix_y_, policy_);
  finish_round(xhat_, mix_x_, yhat_, mix_y_);
}

void Simulator::step_cgt_efficient() {
  const int n = pb_->n;
  const bool exact = is_exact(kind_);
  auto comm = [&](const Mat& z_src, Mat& h, Mat& hw, double alpha, RngTag tag, Mat& hat, Mat& hatw) {
    z_ = z_src - h;
    kernels::compress_rows(kind_, z_, seed_, static_cast<std::uint64_t>(k_), tag, q_, policy_);
    hat.resize(z_.rows(), z_.cols());
    hatw.resize(z_.rows(), z_.cols());
    if (exact) {
      // lossless messages: neighbours hold x itself, so mix it directly
      hat = z_src;
      kernels::mix_rows(*w_, hat, hatw, policy_);
    } else {
      kernels::mix_rows(*w_, q_, qh_, policy_);  // W Q from received messages
      kernels::for_each_agent(policy_, n, [&](int i) {
        hat.row(i) = h.row(i) + q_.row(i);
        hatw.row(i) = hw.row(i) + qh_.row(i);
      });
    }
    kernels::for_each_agent(policy_, n, [&](int i) {
      h.row(i) = (1.0 - alpha) * h.row(i) + alpha * hat.row(i);
      hw.row(i) = (1.0 - alpha) * hw.row(i) + alpha * hatw.row(i);
    });
  };
  comm(s_.X, s_.Hx, s_.Hxw, hp_.alpha_x, RngTag::kXDiff, xhat_, mix_x_);
  comm(s_.Y, s_.Hy, s_.Hyw, hp_.alpha_y, RngTag::kYDiff, yhat_, mix_y_);
  finish_round(xhat_, mix_x_, yhat_, mix_y_);
}

void Simulator::step_efcgt_reference() {
  const int n = pb_->n;
  const auto k = static_cast<std::uint64_t>(k_);
  auto comm = [&](const Mat& z_src, Mat& h, Mat& e, double alpha, double beta, RngTag diff_tag,
                  RngTag ef_tag, Mat& hat) {
    Mat d = z_src - h;
    kernels::compress_rows(kind_, d, seed_, k, diff_tag, q_, policy_);
    z_ = beta * e + d;
    kernels::compress_rows(kind_, z_, seed_, k, ef_tag, qh_, policy_);
    hat.resize(d.rows(), d.cols());
    kernels::for_each_agent(policy_, n, [&](int i) {
      e.row(i) = z_.row(i) - qh_.row(i);
      hat.row(i) = h.row(i) + qh_.row(i);
      h.row(i) = h.row(i) + alpha * q_.row(i);
    });
  };
  comm(s_.X, s_.Hx, s_.Ex, hp_.alpha_x, hp_.beta_x, RngTag::kXDiff, RngTag::kXEf, xhat_);
  comm(s_.Y, s_.Hy, s_.Ey, hp_.alpha_y, hp_.beta_y, RngTag::kYDiff, RngTag::kYEf, yhat_);
  kernels::mix_rows(*w_, xhat_, mix_x_, policy_);
  kernels::mix_rows(*w_, yhat_, mix_y_, policy_);
  finish_round(xhat_, mix_x_, yhat_, mix_y_);
}

void Simulator::step_efcgt_efficient() {
  const int n = pb_->n;
  const auto k = static_cast<std::uint64_t>(k_);
  auto comm = [&](const Mat& z_src, Mat& h, Mat& hw, Mat& e, double alpha, double beta, RngTag diff_tag,
                  RngTag ef_tag, Mat& hat, Mat& hatw) {
    Mat d = z_src - h;
    kernels::compress_rows(kind_, d, seed_, k, diff_tag, q_, policy_);
    z_ = beta * e + d;
    kernels::compress_rows(kind_, z_, seed_, k, ef_tag, qh_, policy_);
    Mat wq, wqh;
    kernels::mix_rows(*w_, q_, wq, policy_);
    kernels::mix_rows(*w_, qh_, wqh, policy_);
    hat.resize(d.rows(), d.cols());
    hatw.resize(d.rows(), d.cols());
    kernels::for_each_agent(policy_, n, [&](int i) {
      hat.row(i) = h.row(i) + qh_.row(i);
      hatw.row(i) = hw.row(i) + wqh.row(i);
      // residual is taken against the reference state before its update
      e.row(i) = z_.row(i) - qh_.row(i);
      h.row(i) = h.row(i) + alpha * q_.row(i);
      hw.row(i) = hw.row(i) + alpha * wq.row(i);
    });
  };
  comm(s_.X, s_.Hx, s_.Hxw, s_.Ex, hp_.alpha_x, hp_.beta_x, RngTag::kXDiff, RngTag::kXEf, xhat_, mix_x_);
  comm(s_.Y, s_.Hy, s_.Hyw, s_.Ey, hp_.alpha_y, hp_.beta_y, RngTag::kYDiff, RngTag::kYEf, yhat_, mix_y_);
  finish_round(xhat_, mix_x_, yhat_, mix_y_);
}

RunResult run(Algorithm algorithm, const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
              const CompressorKind& kind, const RunOptions& opts) {
  if (opts.K < 0) throw std::invalid_argument("K must be >= 0");
  if (opts.trace_every < 1) throw std::invalid_argument("trace_every must be >= 1");
  const Mat x0 = opts.x0 ? *opts.x0 : random_initial_point(pb.n, pb.p, opts.x0_seed);
  Simulator sim(pb, w, hp, algorithm, kind, opts.seed, x0, opts.policy);
  const Vec x_star = optimal_solution(pb).x_star;
  const double d0 = dist_to_optimum(x0, x_star);

  RunResult res;
  res.algorithm = algorithm;
  res.hp = hp;
  res.kind = kind;
  res.seed = opts.seed;
  res.trace.reserve(static_cast<std::size_t>(opts.K / opts.trace_every + 2));
  res.trace.push_back(metrics(sim.state(), x_star, d0, 0, 0));
  if (opts.observer) opts.observer(0, sim.state());
  for (int k = 1; k <= opts.K; ++k) {
    sim.step();
    const double d = dist_to_optimum(sim.state().X, x_star);
    const double resid = d0 > 0.0 ? d / d0 : d;
    const bool bad = !std::isfinite(resid) || resid > opts.divergence_threshold;
    if (k % opts.trace_every == 0 || k == opts.K || bad)
      res.trace.push_back(metrics(sim.state(), x_star, d0, k, sim.bits_sent()));
    if (opts.observer) opts.observer(k, sim.state());
    if (bad) {
      std::ostringstream os;
      os << to_string(algorithm) << " with " << to_string(kind) << " diverged at k = " << k
         << ": residual " << resid << " exceeds " << opts.divergence_threshold;
      res.diverged = true;
      res.diagnostic = os.str();
      break;
    }
  }
  res.iterations = sim.iteration();
  res.total_bits = sim.bits_sent();
  res.final_state = sim.state();
  return res;
}

RunResult run_gt(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp, const RunOptions& opts) {
  return run(Algorithm::kGt, pb, w, hp, Identity{}, opts);
}

RunResult run_cgt_reference(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                            const CompressorKind& kind, const RunOptions& opts) {
  return run(Algorithm::kCgtReference, pb, w, hp, kind, opts);
}

RunResult run_cgt_efficient(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                            const CompressorKind& kind, const RunOptions& opts) {
  return run(Algorithm::kCgtEfficient, pb, w, hp, kind, opts);
}

RunResult run_efcgt_reference(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, const RunOptions& opts) {
  return run(Algorithm::kEfcgtReference, pb, w, hp, kind, opts);
}

RunResult run_efcgt_efficient(const RidgeProblem& pb, const WeightMatrix& w, const HyperParams& hp,
                              const CompressorKind& kind, const RunOptions& opts) {
  return run(Algorithm::kEfcgtEfficient, pb, w, hp, kind, opts);
}

}  // namespace cgt
