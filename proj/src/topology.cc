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

#include "cgt/topology.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace cgt {

namespace {

std::string describe(StochasticityError::Axis axis, int index, double value) {
  std::ostringstream os;
  os.precision(17);
  switch (axis) {
    case StochasticityError::Axis::kRow:
      os << "row " << index << " sums to " << value << ", expected 1";
      break;
    case StochasticityError::Axis::kColumn:
      os << "column " << index << " sums to " << value << ", expected 1";
      break;
    case StochasticityError::Axis::kEntry:
      os << "negative weight in row " << index << ": " << value;
      break;
  }
  return os.str();
}

bool reaches_all(const Graph& g, int src, bool reverse) {
  std::vector<char> seen(g.n, 0);
  std::deque<int> q{src};
  seen[src] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : reverse ? g.in_neighbors(u) : g.out_neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push_back(v);
      }
    }
  }
  return count == g.n;
}

}  // namespace

std::vector<int> Graph::out_neighbors(int i) const {
  std::vector<int> out;
  for (auto it = edges.lower_bound({i, -1}); it != edges.end() && it->first == i; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> Graph::in_neighbors(int i) const {
  std::vector<int> in;
  for (const auto& [a, b] : edges) {
    if (b == i) in.push_back(a);
  }
  return in;
}

bool Graph::strongly_connected() const {
  if (n <= 1) return n == 1;
  // one forward and one backward sweep from node 0 is enough
  return reaches_all(*this, 0, false) && reaches_all(*this, 0, true);
}

Graph build_ring(int n, bool directed) {
  if (n < 2) throw std::invalid_argument("ring needs n >= 2, got " + std::to_string(n));
  Graph g;
  g.n = n;
  g.directed = directed;
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    g.edges.insert({i, j});
    if (!directed) g.edges.insert({j, i});
  }
  return g;
}

Graph build_complete(int n) {
  if (n < 1) throw std::invalid_argument("complete graph needs n >= 1");
  Graph g;
  g.n = n;
  g.directed = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.edges.insert({i, j});
  return g;
}

StochasticityError::StochasticityError(Axis axis, int index, double value)
    : std::runtime_error(describe(axis, index, value)), axis_(axis), index_(index), value_(value) {}

WeightMatrix WeightMatrix::FromDense(const Mat& w) {
  if (w.rows() != w.cols() || w.rows() == 0)
    throw std::invalid_argument("weight matrix must be square and non-empty");
  const int n = static_cast<int>(w.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(w(i, j) >= 0.0) || !std::isfinite(w(i, j)))
        throw StochasticityError(StochasticityError::Axis::kEntry, i, w(i, j));
  for (int i = 0; i < n; ++i) {
    double s = w.row(i).sum();
    if (std::abs(s - 1.0) > kTolerance) throw StochasticityError(StochasticityError::Axis::kRow, i, s);
  }
  for (int j = 0; j < n; ++j) {
    double s = w.col(j).sum();
    if (std::abs(s - 1.0) > kTolerance)
      throw StochasticityError(StochasticityError::Axis::kColumn, j, s);
  }
  WeightMatrix out;
  out.dense_ = w;
  out.rows_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) out.rows_[i].push_back({j, w(i, j)});
  return out;
}

double WeightMatrix::max_row_sum_error() const {
  return (dense_.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double WeightMatrix::max_col_sum_error() const {
  return (dense_.colwise().sum().array() - 1.0).abs().maxCoeff();
}

WeightMatrix build_weights_outdegree(const Graph& g, const std::vector<double>& shared_or_per_agent) {
  std::vector<double> p = shared_or_per_agent;
  if (p.size() == 1) p.assign(g.n, p[0]);
  if (static_cast<int>(p.size()) != g.n)
    throw std::invalid_argument("need one weight, or one per agent");
  Mat w = Mat::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    auto out = g.out_neighbors(i);
    double rest = 1.0 - static_cast<double>(out.size()) * p[i];
    if (!(p[i] > 0.0) || !(rest > 0.0)) {
      std::ostringstream os;
      os << "agent " << i << ": 1 - Deg_out * p_i = " << rest << " must be > 0 with p_i > 0";
      throw std::invalid_argument(os.str());
    }
    double off = 0.0;
    for (int j : out) {
      w(i, j) = p[i];
      off += p[i];
    }
    w(i, i) = 1.0 - off;
  }
  return WeightMatrix::FromDense(w);
}

WeightMatrix build_weights_laplacian(const Graph& g, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("laplacian step a must be positive");
  int max_deg = 0;
  for (int i = 0; i < g.n; ++i) {
    auto out = g.out_neighbors(i);
    if (out.size() != g.in_neighbors(i).size())
      throw std::invalid_argument("laplacian weights need in-degree == out-degree at agent " +
                                  std::to_string(i));
    max_deg = std::max<int>(max_deg, static_cast<int>(out.size()));
  }
  if (a * max_deg > 1.0) {
    std::ostringstream os;
    os << "a = " << a << " makes a diagonal weight negative; use a <= " << 1.0 / max_deg;
    throw std::invalid_argument(os.str());
  }
  Mat w = Mat::Identity(g.n, g.n);
  for (const auto& [i, j] : g.edges) {
    w(i, j) += a;
    w(i, i) -= a;
  }
  return WeightMatrix::FromDense(w);
}

double largest_singular_value(const Mat& m, double tol, int max_iter) {
  const Eigen::Index c = m.cols();
  if (c == 0 || m.norm() == 0.0) return 0.0;
  Vec v(c);
  for (Eigen::Index i = 0; i < c; ++i) v(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec mv = m * v;
    double next = mv.squaredNorm();
    Vec w = m.transpose() * mv;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(next - lambda) <= tol * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

SpectralInfo spectral_info(const WeightMatrix& w) {
  const int n = w.n();
  Mat dev = w.dense() - Mat::Constant(n, n, 1.0 / n);
  Mat lap = Mat::Identity(n, n) - w.dense();
  SpectralInfo info;
  info.rho_w = largest_singular_value(dev);
  info.s = 1.0 - info.rho_w;
  info.norm_IminusW = largest_singular_value(lap);
  return info;
}

}  // namespace cgt
