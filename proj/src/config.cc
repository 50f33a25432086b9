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

#include "cgt/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cgt {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"topology", {"kind", "n", "directed", "weights", "p", "a"}},
      {"problem", {"n", "p", "rho", "noise_std", "seed"}},
      {"algorithm", {"name", "compressor", "seed", "K", "trace_every", "threads", "certify", "label"}},
      {"hyper", {"eta", "gamma", "alpha_x", "alpha_y", "beta_x", "beta_y", "eta_agents"}},
      {"output", {"path"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& field, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(field, "expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& field, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(field, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& field, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(field, trim(item)));
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + g17(v[i]);
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) {
      if (body.empty()) throw ConfigError(section, "key outside any section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError(section + "." + kv.first, "unknown key");
  }

  ExperimentConfig cfg;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };

  auto& t = cfg.topology;
  if (auto v = get("topology.kind")) t.kind = *v;
  if (auto v = get("topology.n")) t.n = static_cast<int>(to_int("topology.n", *v));
  if (auto v = get("topology.directed")) t.directed = to_bool("topology.directed", *v);
  if (auto v = get("topology.weights")) t.weights = *v;
  if (auto v = get("topology.p")) t.p = to_list("topology.p", *v);
  if (auto v = get("topology.a")) t.a = to_double("topology.a", *v);

  auto& p = cfg.problem;
  if (auto v = get("problem.n")) p.n = static_cast<int>(to_int("problem.n", *v));
  if (auto v = get("problem.p")) p.p = static_cast<int>(to_int("problem.p", *v));
  if (auto v = get("problem.rho")) p.rho = to_double("problem.rho", *v);
  if (auto v = get("problem.noise_std")) p.noise_std = to_double("problem.noise_std", *v);
  if (auto v = get("problem.seed"))
    p.seed = static_cast<std::uint64_t>(to_int("problem.seed", *v));

  if (auto v = get("algorithm.name")) {
    try {
      cfg.algorithm = parse_algorithm(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("algorithm.name", e.what());
    }
  }
  if (auto v = get("algorithm.label")) cfg.name = *v;
  if (auto v = get("algorithm.compressor")) cfg.compressor = *v;
  if (auto v = get("algorithm.seed")) cfg.seed = static_cast<std::uint64_t>(to_int("algorithm.seed", *v));
  if (auto v = get("algorithm.K")) cfg.K = static_cast<int>(to_int("algorithm.K", *v));
  if (auto v = get("algorithm.trace_every"))
    cfg.trace_every = static_cast<int>(to_int("algorithm.trace_every", *v));
  if (auto v = get("algorithm.threads")) cfg.threads = static_cast<int>(to_int("algorithm.threads", *v));
  if (auto v = get("algorithm.certify")) cfg.certify = to_bool("algorithm.certify", *v);

  auto& h = cfg.hyper;
  if (auto v = get("hyper.eta")) h.eta = to_double("hyper.eta", *v);
  if (auto v = get("hyper.gamma")) h.gamma = to_double("hyper.gamma", *v);
  if (auto v = get("hyper.alpha_x")) h.alpha_x = to_double("hyper.alpha_x", *v);
  if (auto v = get("hyper.alpha_y")) h.alpha_y = to_double("hyper.alpha_y", *v);
  if (auto v = get("hyper.beta_x")) h.beta_x = to_double("hyper.beta_x", *v);
  if (auto v = get("hyper.beta_y")) h.beta_y = to_double("hyper.beta_y", *v);
  if (auto v = get("hyper.eta_agents")) h.eta_agents = to_list("hyper.eta_agents", *v);

  if (auto v = get("output.path")) cfg.output = *v;
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  const auto& t = cfg.topology;
  const auto& p = cfg.problem;
  const auto& h = cfg.hyper;
  std::ostringstream o;
  o << "[topology]\nkind = " << t.kind << "\nn = " << t.n << "\ndirected = " << (t.directed ? "true" : "false")
    << "\nweights = " << t.weights << "\np = " << join(t.p) << "\na = " << g17(t.a) << "\n\n";
  o << "[problem]\nn = " << p.n << "\np = " << p.p << "\nrho = " << g17(p.rho)
    << "\nnoise_std = " << g17(p.noise_std) << "\nseed = " << p.seed << "\n\n";
  o << "[algorithm]\nlabel = " << cfg.name << "\nname = " << to_string(cfg.algorithm)
    << "\ncompressor = " << cfg.compressor << "\nseed = " << cfg.seed << "\nK = " << cfg.K
    << "\ntrace_every = " << cfg.trace_every << "\nthreads = " << cfg.threads
    << "\ncertify = " << (cfg.certify ? "true" : "false") << "\n\n";
  o << "[hyper]\neta = " << g17(h.eta) << "\ngamma = " << g17(h.gamma) << "\nalpha_x = " << g17(h.alpha_x)
    << "\nalpha_y = " << g17(h.alpha_y) << "\nbeta_x = " << g17(h.beta_x) << "\nbeta_y = " << g17(h.beta_y)
    << "\n";
  if (!h.eta_agents.empty()) o << "eta_agents = " << join(h.eta_agents) << "\n";
  if (!cfg.output.empty()) o << "\n[output]\npath = " << cfg.output << "\n";
  return o.str();
}

void validate(const ExperimentConfig& cfg) {
  const auto& t = cfg.topology;
  if (t.kind != "ring" && t.kind != "complete")
    throw ConfigError("topology.kind", "expected ring or complete, got '" + t.kind + "'");
  if (t.n < 2) throw ConfigError("topology.n", "need at least 2 agents");
  if (t.weights != "outdegree" && t.weights != "laplacian")
    throw ConfigError("topology.weights", "expected outdegree or laplacian");
  if (t.weights == "outdegree" && t.p.size() != 1 && static_cast<int>(t.p.size()) != t.n)
    throw ConfigError("topology.p", "give one value or one per agent");
  if (t.weights == "laplacian" && !(t.a > 0.0)) throw ConfigError("topology.a", "must be positive");
  if (t.kind == "complete" && t.directed) throw ConfigError("topology.directed", "complete graph is undirected");

  const auto& p = cfg.problem;
  if (p.n != t.n)
    throw ConfigError("problem.n", "topology has " + std::to_string(t.n) + " agents, problem has " +
                                       std::to_string(p.n));
  if (p.p < 1) throw ConfigError("problem.p", "must be positive");
  if (!(p.rho > 0.0)) throw ConfigError("problem.rho", "must be positive");
  if (p.noise_std < 0.0) throw ConfigError("problem.noise_std", "must be nonnegative");

  try {
    parse_compressor(cfg.compressor);
  } catch (const std::exception& e) {
    throw ConfigError("algorithm.compressor", e.what());
  }
  if (cfg.K < 0) throw ConfigError("algorithm.K", "must be nonnegative");
  if (cfg.trace_every < 1) throw ConfigError("algorithm.trace_every", "must be at least 1");
  if (cfg.threads < 0) throw ConfigError("algorithm.threads", "must be nonnegative");

  const auto& h = cfg.hyper;
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!(h.eta > 0.0) || !std::isfinite(h.eta)) throw ConfigError("hyper.eta", "must be positive");
  if (!in_unit(h.gamma)) throw ConfigError("hyper.gamma", "must lie in (0, 1]");
  if (!in_unit(h.alpha_x)) throw ConfigError("hyper.alpha_x", "must lie in (0, 1]");
  if (!in_unit(h.alpha_y)) throw ConfigError("hyper.alpha_y", "must lie in (0, 1]");
  if (!in_unit(h.beta_x)) throw ConfigError("hyper.beta_x", "must lie in (0, 1]");
  if (!in_unit(h.beta_y)) throw ConfigError("hyper.beta_y", "must lie in (0, 1]");
  if (!h.eta_agents.empty()) {
    if (static_cast<int>(h.eta_agents.size()) != p.n)
      throw ConfigError("hyper.eta_agents", "needs one entry per agent");
    for (double e : h.eta_agents)
      if (!(e > 0.0)) throw ConfigError("hyper.eta_agents", "entries must be positive");
  }
}

Graph build_graph(const TopologySpec& t) {
  return t.kind == "complete" ? build_complete(t.n) : build_ring(t.n, t.directed);
}

WeightMatrix build_weights(const TopologySpec& t) {
  const Graph g = build_graph(t);
  try {
    if (t.weights == "laplacian") return build_weights_laplacian(g, t.a);
    return build_weights_outdegree(g, t.p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("topology." + std::string(t.weights == "laplacian" ? "a" : "p"), e.what());
  } catch (const StochasticityError& e) {
    throw ConfigError("topology.weights", e.what());
  }
}

RidgeProblem build_problem(const ProblemSpec& p) {
  return generate_ridge(p.n, p.p, p.rho, p.noise_std, p.seed);
}

CompressorKind compressor_of(const ExperimentConfig& cfg) { return parse_compressor(cfg.compressor); }

}  // namespace cgt
