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

#ifndef CGT_COMPRESSION_H_
#define CGT_COMPRESSION_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>

#include "cgt/common.h"

namespace cgt {

// q is 1, 2 or +infinity everywhere below.
struct Identity {};
struct UnbiasedQuantize {
  int b = 2;
  double q = 2.0;
};
struct TopK {
  int k = 1;
};
struct RandK {
  int k = 1;
};
struct NormSign {
  double q = 2.0;
};
struct RescaledNormSign {
  double q = 2.0;
  std::optional<double> r;  // unset: divide by p
};

using CompressorKind = std::variant<Identity, UnbiasedQuantize, TopK, RandK, NormSign, RescaledNormSign>;

// "identity", "quant:b=2,q=inf", "topk:k=1", "randk:k=1", "normsign:q=inf",
// "normsign-rescaled:q=inf,r=20". Throws std::invalid_argument.
CompressorKind parse_compressor(const std::string& text);
std::string to_string(const CompressorKind& kind);

bool is_stochastic(const CompressorKind& kind);
bool is_unbiased(const CompressorKind& kind);
// Reconstruction h + C(z - h) equals z in exact arithmetic.
bool is_exact(const CompressorKind& kind);

enum class RngTag : std::uint64_t { kXDiff = 1, kYDiff = 2, kXEf = 3, kYEf = 4, kAux = 5 };

class RngStream {
 public:
  explicit RngStream(std::uint64_t raw_seed);
  RngStream(std::uint64_t seed, std::uint64_t agent, std::uint64_t iteration, RngTag tag);

  double uniform();  // [0, 1)
  double normal();
  int below(int n);  // [0, n)
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct CompressedMessage {
  Vec payload;
  std::int64_t bit_cost = 0;
};

CompressedMessage compress(const CompressorKind& kind, std::span<const double> x, RngStream& rng);
// Payload only, written to out (size p). Same draws as compress().
void compress_into(const CompressorKind& kind, std::span<const double> x, RngStream& rng,
                   std::span<double> out);

// The b-bit quantizer with the dither vector supplied by the caller.
void quantize(std::span<const double> x, int b, double q, std::span<const double> u,
              std::span<double> out);

double norm_q(std::span<const double> x, double q);

std::int64_t bit_cost(const CompressorKind& kind, int p);

enum class Provenance { kAnalytic, kEmpirical };

struct CompressorProfile {
  double C = 0.0;
  double delta = 1.0;
  double r = 1.0;
  Provenance provenance = Provenance::kAnalytic;
};

std::optional<CompressorProfile> analytic_profile(const CompressorKind& kind, int p);

// ratio: worst observed E||C(x)/r - x||^2 / ||x||^2. For stochastic kinds the
// worst input from the screening pass is re-measured with fresh draws, and
// ratio/std_error describe that second measurement.
struct BoundEstimate {
  double ratio = 0.0;
  double std_error = 0.0;
  double screen_max = 0.0;
  Vec worst_input;
};

BoundEstimate estimate_variance_ratio(const CompressorKind& kind, int p, int trials, RngStream& rng,
                                      ExecutionPolicy policy = ExecutionPolicy::kParallel);
BoundEstimate estimate_contraction(const CompressorKind& kind, double r, int p, int trials,
                                   RngStream& rng,
                                   ExecutionPolicy policy = ExecutionPolicy::kParallel);

// Mean and standard error of ||C(x)/r - x||^2 / ||x||^2 at one fixed x.
struct RatioSample {
  double mean = 0.0;
  double std_error = 0.0;
};
RatioSample measure_ratio(const CompressorKind& kind, double r, std::span<const double> x, int reps,
                          std::uint64_t seed);

// Analytic profile when one exists, otherwise built from estimates (C padded
// by three standard errors).
CompressorProfile resolve_profile(const CompressorKind& kind, int p, int trials, std::uint64_t seed);

}  // namespace cgt

#endif  // CGT_COMPRESSION_H_
