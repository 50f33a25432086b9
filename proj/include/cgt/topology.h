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

#ifndef CGT_TOPOLOGY_H_
#define CGT_TOPOLOGY_H_

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgt/common.h"

namespace cgt {

// (i, j) means i can send to j. Self loops are never stored.
struct Graph {
  int n = 0;
  std::set<std::pair<int, int>> edges;
  bool directed = true;

  std::vector<int> out_neighbors(int i) const;
  std::vector<int> in_neighbors(int i) const;
  bool strongly_connected() const;
};

Graph build_ring(int n, bool directed);
Graph build_complete(int n);

// Thrown when a row or column of a candidate mixing matrix does not sum to 1,
// or an entry is negative.
class StochasticityError : public std::runtime_error {
 public:
  enum class Axis { kRow, kColumn, kEntry };
  StochasticityError(Axis axis, int index, double value);
  Axis axis() const { return axis_; }
  int index() const { return index_; }
  double value() const { return value_; }

 private:
  Axis axis_;
  int index_;
  double value_;
};

class WeightMatrix {
 public:
  struct Entry {
    int j;
    double w;
  };

  static constexpr double kTolerance = 1e-12;

  // Validates nonnegativity and row/column sums.
  static WeightMatrix FromDense(const Mat& w);

  int n() const { return static_cast<int>(dense_.rows()); }
  const Mat& dense() const { return dense_; }
  double operator()(int i, int j) const { return dense_(i, j); }
  // Nonzeros of row i in increasing column order, diagonal included.
  const std::vector<Entry>& row(int i) const { return rows_[i]; }

  double max_row_sum_error() const;
  double max_col_sum_error() const;

 private:
  Mat dense_;
  std::vector<std::vector<Entry>> rows_;
};

// p holds one shared value or one per agent.
WeightMatrix build_weights_outdegree(const Graph& g, const std::vector<double>& p);
WeightMatrix build_weights_laplacian(const Graph& g, double a);

struct SpectralInfo {
  double rho_w = 0.0;
  double s = 1.0;
  double norm_IminusW = 0.0;
  double rho_tilde(double gamma) const { return 1.0 - gamma * s; }
};

SpectralInfo spectral_info(const WeightMatrix& w);

// sigma_max(m) by power iteration on m^T m.
double largest_singular_value(const Mat& m, double tol = 1e-12, int max_iter = 100000);

}  // namespace cgt

#endif  // CGT_TOPOLOGY_H_
