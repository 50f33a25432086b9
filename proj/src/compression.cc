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

#include "cgt/compression.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cgt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_q(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  if (s == "1") return 1.0;
  if (s == "2") return 2.0;
  throw std::invalid_argument("norm index q must be 1, 2 or inf, got '" + s + "'");
}

std::string q_name(double q) { return std::isinf(q) ? "inf" : std::to_string(static_cast<int>(q)); }

int parse_int(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw std::invalid_argument("compressor parameter " + key + " must be an integer, got '" + s + "'");
  return v;
}

void check_q(double q) {
  if (!(q == 1.0 || q == 2.0 || std::isinf(q)))
    throw std::invalid_argument("norm index q must be 1, 2 or inf");
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("compress: input contains NaN or Inf");
}

void top_k(std::span<const double> x, int k, std::span<double> out) {
  const int p = static_cast<int>(x.size());
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  // ties go to the lower index
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    double fa = std::abs(x[a]), fb = std::abs(x[b]);
    return fa > fb || (fa == fb && a < b);
  });
  std::fill(out.begin(), out.end(), 0.0);
  for (int t = 0; t < k; ++t) out[idx[t]] = x[idx[t]];
}

void rand_k(std::span<const double> x, int k, RngStream& rng, std::span<double> out) {
  const int p = static_cast<int>(x.size());
  std::vector<int> idx(p), pick;
  std::iota(idx.begin(), idx.end(), 0);
  pick.reserve(k);
  std::sample(idx.begin(), idx.end(), std::back_inserter(pick), k, rng.engine());
  std::fill(out.begin(), out.end(), 0.0);
  for (int j : pick) out[j] = x[j];
}

void validate(const CompressorKind& kind, int p) {
  std::visit(overloaded{
                 [](const Identity&) {},
                 [](const UnbiasedQuantize& c) {
                   if (c.b < 1) throw std::invalid_argument("quantizer needs b >= 1");
                   check_q(c.q);
                 },
                 [p](const TopK& c) {
                   if (c.k < 1 || c.k > p) throw std::invalid_argument("top-k needs 1 <= k <= p");
                 },
                 [p](const RandK& c) {
                   if (c.k < 1 || c.k > p) throw std::invalid_argument("rand-k needs 1 <= k <= p");
                 },
                 [](const NormSign& c) { check_q(c.q); },
                 [](const RescaledNormSign& c) {
                   check_q(c.q);
                   if (c.r && !(*c.r > 0.0)) throw std::invalid_argument("rescale r must be > 0");
                 },
             },
             kind);
}

}  // namespace

CompressorKind parse_compressor(const std::string& text) {
  std::string name = text, rest;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    rest = text.substr(colon + 1);
  }
  std::map<std::string, std::string> kv;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("compressor parameter without '=': " + item);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  CompressorKind kind;
  if (name == "identity") {
    kind = Identity{};
  } else if (name == "quant") {
    UnbiasedQuantize c;
    if (auto v = take("b")) c.b = parse_int("b", *v);
    if (auto v = take("q")) c.q = parse_q(*v);
    kind = c;
  } else if (name == "topk" || name == "randk") {
    int k = 1;
    if (auto v = take("k")) k = parse_int("k", *v);
    if (name == "topk")
      kind = TopK{k};
    else
      kind = RandK{k};
  } else if (name == "normsign") {
    NormSign c;
    if (auto v = take("q")) c.q = parse_q(*v);
    kind = c;
  } else if (name == "normsign-rescaled") {
    RescaledNormSign c;
    if (auto v = take("q")) c.q = parse_q(*v);
    if (auto v = take("r")) c.r = std::stod(*v);
    kind = c;
  } else {
    throw std::invalid_argument("unknown compressor '" + name + "'");
  }
  if (!kv.empty()) throw std::invalid_argument("unknown compressor parameter '" + kv.begin()->first + "'");
  validate(kind, std::numeric_limits<int>::max());
  return kind;
}

std::string to_string(const CompressorKind& kind) {
  return std::visit(
      overloaded{
          [](const Identity&) { return std::string("identity"); },
          [](const UnbiasedQuantize& c) { return "quant:b=" + std::to_string(c.b) + ",q=" + q_name(c.q); },
          [](const TopK& c) { return "topk:k=" + std::to_string(c.k); },
          [](const RandK& c) { return "randk:k=" + std::to_string(c.k); },
          [](const NormSign& c) { return "normsign:q=" + q_name(c.q); },
          [](const RescaledNormSign& c) {
            std::string s = "normsign-rescaled:q=" + q_name(c.q);
            if (c.r) {
              std::ostringstream os;
              os << *c.r;
              s += ",r=" + os.str();
            }
            return s;
          },
      },
      kind);
}

bool is_stochastic(const CompressorKind& kind) {
  return std::holds_alternative<UnbiasedQuantize>(kind) || std::holds_alternative<RandK>(kind);
}

bool is_unbiased(const CompressorKind& kind) {
  return std::holds_alternative<Identity>(kind) || std::holds_alternative<UnbiasedQuantize>(kind);
}

bool is_exact(const CompressorKind& kind) { return std::holds_alternative<Identity>(kind); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a ^ b-rotated
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t agent, std::uint64_t iteration, RngTag tag)
    : engine_(mix_seed(mix_seed(mix_seed(seed, agent), iteration), static_cast<std::uint64_t>(tag))) {}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

int RngStream::below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

double norm_q(std::span<const double> x, double q) {
  double acc = 0.0;
  if (std::isinf(q)) {
    for (double v : x) acc = std::max(acc, std::abs(v));
    return acc;
  }
  if (q == 1.0) {
    for (double v : x) acc += std::abs(v);
    return acc;
  }
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

void quantize(std::span<const double> x, int b, double q, std::span<const double> u,
              std::span<double> out) {
  const double nq = norm_q(x, q);
  if (nq == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double levels = std::ldexp(1.0, b - 1);
  const double scale = nq / levels;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double lv = std::floor(levels * std::abs(x[j]) / nq + u[j]);
    out[j] = scale * sign(x[j]) * lv;
  }
}

void compress_into(const CompressorKind& kind, std::span<const double> x, RngStream& rng,
                   std::span<double> out) {
  const int p = static_cast<int>(x.size());
  if (p < 1) throw std::invalid_argument("compress: empty vector");
  if (out.size() != x.size()) throw std::invalid_argument("compress: output size mismatch");
  validate(kind, p);
  check_finite(x);
  std::visit(overloaded{
                 [&](const Identity&) { std::copy(x.begin(), x.end(), out.begin()); },
                 [&](const UnbiasedQuantize& c) {
                   if (norm_q(x, c.q) == 0.0) {
                     std::fill(out.begin(), out.end(), 0.0);
                     return;
                   }
                   std::vector<double> u(p);
                   for (auto& v : u) v = rng.uniform();
                   quantize(x, c.b, c.q, u, out);
                 },
                 [&](const TopK& c) { top_k(x, c.k, out); },
                 [&](const RandK& c) { rand_k(x, c.k, rng, out); },
                 [&](const NormSign& c) {
                   double nq = norm_q(x, c.q);
                   for (int j = 0; j < p; ++j) out[j] = nq * sign(x[j]);
                 },
                 [&](const RescaledNormSign& c) {
                   double nq = norm_q(x, c.q);
                   double r = c.r ? *c.r : static_cast<double>(p);
                   for (int j = 0; j < p; ++j) out[j] = nq * sign(x[j]) / r;
                 },
             },
             kind);
}

CompressedMessage compress(const CompressorKind& kind, std::span<const double> x, RngStream& rng) {
  CompressedMessage msg;
  msg.payload.resize(static_cast<Eigen::Index>(x.size()));
  compress_into(kind, x, rng, std::span<double>(msg.payload.data(), x.size()));
  msg.bit_cost = bit_cost(kind, static_cast<int>(x.size()));
  return msg;
}

std::int64_t bit_cost(const CompressorKind& kind, int p) {
  validate(kind, p);
  const std::int64_t pp = p;
  const std::int64_t index_bits = std::bit_width(static_cast<std::uint64_t>(p - 1));
  return std::visit(overloaded{
                        [&](const Identity&) { return 64 * pp; },
                        [&](const UnbiasedQuantize& c) { return 64 + pp + c.b * pp; },
                        [&](const TopK& c) { return c.k * (64 + index_bits); },
                        [&](const RandK& c) { return c.k * (64 + index_bits); },
                        [&](const NormSign&) { return 64 + pp; },
                        [&](const RescaledNormSign&) { return 64 + pp; },
                    },
                    kind);
}

std::optional<CompressorProfile> analytic_profile(const CompressorKind& kind, int p) {
  const double pd = p;
  auto sign_delta = [&](double q) { return std::isinf(q) ? 1.0 / (pd * pd) : 1.0 / pd; };
  return std::visit(
      overloaded{
          [](const Identity&) -> std::optional<CompressorProfile> {
            return CompressorProfile{0.0, 1.0, 1.0, Provenance::kAnalytic};
          },
          [](const UnbiasedQuantize&) -> std::optional<CompressorProfile> { return std::nullopt; },
          [&](const TopK& c) -> std::optional<CompressorProfile> {
            if (c.k > p) return std::nullopt;
            double d = c.k / pd;
            return CompressorProfile{1.0 - d, d, 1.0, Provenance::kAnalytic};
          },
          [&](const RandK& c) -> std::optional<CompressorProfile> {
            if (c.k > p) return std::nullopt;
            double d = c.k / pd;
            return CompressorProfile{1.0 - d, d, 1.0, Provenance::kAnalytic};
          },
          [&](const NormSign& c) -> std::optional<CompressorProfile> {
            double C = c.q == 1.0 ? (pd - 1.0) * (pd - 1.0) : pd - 1.0;
            return CompressorProfile{C, sign_delta(c.q), pd, Provenance::kAnalytic};
          },
          [&](const RescaledNormSign& c) -> std::optional<CompressorProfile> {
            // dividing by p already applied: contractive with r = 1
            if (c.r && *c.r != pd) return std::nullopt;
            double d = sign_delta(c.q);
            return CompressorProfile{1.0 - d, d, 1.0, Provenance::kAnalytic};
          },
      },
      kind);
}

RatioSample measure_ratio(const CompressorKind& kind, double r, std::span<const double> x, int reps,
                          std::uint64_t seed) {
  const std::size_t p = x.size();
  double nx = 0.0;
  for (double v : x) nx += v * v;
  if (nx == 0.0) return {};
  std::vector<double> out(p);
  const int m = is_stochastic(kind) ? reps : 1;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < m; ++t) {
    RngStream rng(seed, 0, static_cast<std::uint64_t>(t), RngTag::kAux);
    compress_into(kind, x, rng, out);
    double e = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      double d = out[j] / r - x[j];
      e += d * d;
    }
    double ratio = e / nx;
    sum += ratio;
    sum2 += ratio * ratio;
  }
  RatioSample s;
  s.mean = sum / m;
  if (m > 1) {
    double var = std::max(0.0, (sum2 - m * s.mean * s.mean) / (m - 1));
    s.std_error = std::sqrt(var / m);
  }
  return s;
}

namespace {

// Four input families: dense gaussian directions, sparse, one-hot, and a
// dominant coordinate over a faint dense background.
Vec draw_input(int p, int trial, std::uint64_t seed) {
  RngStream rng(seed, static_cast<std::uint64_t>(trial), 0, RngTag::kAux);
  Vec x = Vec::Zero(p);
  switch (trial % 4) {
    case 0:
      for (int j = 0; j < p; ++j) x(j) = rng.normal();
      break;
    case 1: {
      int support = 1 + rng.below(std::max(1, p / 2));
      for (int t = 0; t < support; ++t) x(rng.below(p)) = rng.normal();
      break;
    }
    case 2:
      x(rng.below(p)) = rng.uniform() < 0.5 ? -1.0 : 1.0;
      break;
    default: {
      double faint = std::pow(10.0, -4.0 * rng.uniform());
      for (int j = 0; j < p; ++j) x(j) = faint * rng.normal();
      x(rng.below(p)) = 1.0;
      break;
    }
  }
  double n = x.norm();
  if (n == 0.0) {
    x(0) = 1.0;
    n = 1.0;
  }
  return x / n;
}

BoundEstimate estimate(const CompressorKind& kind, double r, int p, int trials, RngStream& rng,
                       ExecutionPolicy policy) {
  if (trials < 1) throw std::invalid_argument("estimate needs trials >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("estimate needs r > 0");
  validate(kind, p);
  const std::uint64_t base = rng.next_u64();
  const bool stochastic = is_stochastic(kind);
  const int screen_reps = 32;
  std::vector<double> screened(trials);
  const bool par = policy == ExecutionPolicy::kParallel;
#pragma omp parallel for schedule(static) if (par)
  for (int t = 0; t < trials; ++t) {
    Vec x = draw_input(p, t, base);
    screened[t] = measure_ratio(kind, r, std::span<const double>(x.data(), p), screen_reps,
                                mix_seed(base, static_cast<std::uint64_t>(t))).mean;
  }
  int worst = static_cast<int>(std::max_element(screened.begin(), screened.end()) - screened.begin());
  BoundEstimate est;
  est.screen_max = screened[worst];
  est.worst_input = draw_input(p, worst, base);
  if (!stochastic) {
    est.ratio = est.screen_max;
    return est;
  }
  // fresh draws at the screened maximizer: avoids the upward bias of taking a max of noisy means
  RatioSample again = measure_ratio(kind, r, std::span<const double>(est.worst_input.data(), p), 10000,
                                    mix_seed(base, ~0ULL));
  est.ratio = again.mean;
  est.std_error = again.std_error;
  return est;
}

}  // namespace

BoundEstimate estimate_variance_ratio(const CompressorKind& kind, int p, int trials, RngStream& rng,
                                      ExecutionPolicy policy) {
  return estimate(kind, 1.0, p, trials, rng, policy);
}

BoundEstimate estimate_contraction(const CompressorKind& kind, double r, int p, int trials,
                                   RngStream& rng, ExecutionPolicy policy) {
  return estimate(kind, r, p, trials, rng, policy);
}

CompressorProfile resolve_profile(const CompressorKind& kind, int p, int trials, std::uint64_t seed) {
  if (auto a = analytic_profile(kind, p)) return *a;
  RngStream rng(seed);
  CompressorProfile prof;
  prof.provenance = Provenance::kEmpirical;
  if (is_unbiased(kind)) {
    BoundEstimate v = estimate_variance_ratio(kind, p, trials, rng);
    prof.C = v.ratio + 3.0 * v.std_error;
    prof.r = prof.C + 1.0;
    prof.delta = 1.0 / (prof.C + 1.0);
    return prof;
  }
  const double r = 1.0;
  BoundEstimate v = estimate_variance_ratio(kind, p, trials, rng);
  BoundEstimate c = estimate_contraction(kind, r, p, trials, rng);
  prof.C = v.ratio + 3.0 * v.std_error;
  prof.r = r;
  prof.delta = 1.0 - (c.ratio + 3.0 * c.std_error);
  if (!(prof.delta > 0.0))
    throw std::invalid_argument("no contractive profile found for " + to_string(kind));
  return prof;
}

}  // namespace cgt
