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

#include "cgt/harness.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cgt {
namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig base(const std::string& name, bool directed) {
  ExperimentConfig c;
  c.name = name;
  c.topology.directed = directed;
  c.K = 5000;
  c.trace_every = 10;
  c.output = name + ".csv";
  return c;
}

ExperimentConfig row(const std::string& name, bool directed, Algorithm a, const std::string& comp, double alpha,
                     double gamma, double eta, double beta = 1.0) {
  ExperimentConfig c = base(name, directed);
  c.algorithm = a;
  c.compressor = comp;
  c.hyper.alpha_x = c.hyper.alpha_y = alpha;
  c.hyper.gamma = gamma;
  c.hyper.eta = eta;
  c.hyper.beta_x = c.hyper.beta_y = beta;
  return c;
}

std::vector<Preset> make_presets() {
  const auto cgt = Algorithm::kCgtEfficient;
  const auto ef = Algorithm::kEfcgtEfficient;
  const std::string quant = "quant:b=2,q=inf", top1 = "topk:k=1", rand1 = "randk:k=1";
  const std::string sign = "normsign:q=inf", rsign = "normsign-rescaled:q=inf,r=20";
  std::vector<Preset> out;
  out.push_back({"fig1-cgt", "undirected ring, 2-bit inf-norm quantizer",
                 {row("fig1-cgt", false, cgt, quant, 1.0, 1.0, 0.09)}});
  out.push_back({"fig2-cgt-directed", "directed ring, 2-bit inf-norm quantizer, with uncompressed GT",
                 {row("fig2-cgt-directed", true, cgt, quant, 1.0, 1.0, 0.0047),
                  row("fig2-gt-directed", true, Algorithm::kGt, "identity", 1.0, 1.0, 0.0047)}});
  out.push_back({"fig3a", "undirected ring, Top-1",
                 {row("fig3a-cgt-top1", false, cgt, top1, 1.0, 0.6, 0.11),
                  row("fig3a-efcgt-top1", false, ef, top1, 1.0, 0.6, 0.12)}});
  out.push_back({"fig3b", "directed ring, Top-1",
                 {row("fig3b-cgt-top1", true, cgt, top1, 1.0, 0.5, 0.00034),
                  row("fig3b-efcgt-top1", true, ef, top1, 1.0, 1.0, 0.0043)}});
  out.push_back({"fig4a", "undirected ring, Rand-1",
                 {row("fig4a-cgt-rand1", false, cgt, rand1, 1.0, 0.1, 0.11),
                  row("fig4a-efcgt-rand1", false, ef, rand1, 1.0, 0.1, 0.11)}});
  out.push_back({"fig4b", "directed ring, Rand-1",
                 {row("fig4b-cgt-rand1", true, cgt, rand1, 1.0, 0.2, 0.0001),
                  row("fig4b-efcgt-rand1", true, ef, rand1, 1.0, 0.3, 0.0012)}});
  out.push_back({"fig5", "directed ring, norm-sign and rescaled norm-sign",
                 {row("fig5-cgt-sign", true, cgt, sign, 0.05, 1.0, 0.01),
                  row("fig5-efcgt-sign", true, ef, sign, 0.05, 1.0, 0.02, 0.01),
                  row("fig5-cgt-rsign", true, cgt, rsign, 1.0, 0.2, 0.0007),
                  row("fig5-efcgt-rsign", true, ef, rsign, 1.0, 0.4, 0.0019, 0.01)}});
  return out;
}

ExecutionPolicy policy_for(int threads) {
  if (threads == 1) return ExecutionPolicy::kSerial;
  if (threads > 1) omp_set_num_threads(threads);
  return ExecutionPolicy::kParallel;
}

bool same_topology(const TopologySpec& a, const TopologySpec& b) {
  return a.kind == b.kind && a.n == b.n && a.directed == b.directed && a.weights == b.weights && a.p == b.p &&
         a.a == b.a;
}

bool same_problem(const ProblemSpec& a, const ProblemSpec& b) {
  return a.n == b.n && a.p == b.p && a.rho == b.rho && a.noise_std == b.noise_std && a.seed == b.seed;
}

}  // namespace

std::string default_out_dir() {
  const char* v = std::getenv(kOutDirEnv);
  return v && *v ? std::string(v) : std::string(".");
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "k,residual,opt_error,consensus_error,tracking_error,compress_error_x,compress_error_y,ef_error_x,"
         "ef_error_y,bits_cumulative\n";
  for (const auto& r : trace) {
    out << r.k << ',' << g17(r.residual) << ',' << g17(r.opt_error) << ',' << g17(r.consensus_error) << ','
        << g17(r.tracking_error) << ',' << g17(r.compress_error_x) << ',' << g17(r.compress_error_y) << ','
        << g17(r.ef_error_x) << ',' << g17(r.ef_error_y) << ',' << r.bits_sent << '\n';
  }
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

int first_hit(const std::vector<TraceRecord>& trace, double level) {
  for (const auto& r : trace)
    if (r.residual <= level) return r.k;
  return -1;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  ExperimentOutcome o;
  o.cfg = cfg;
  const WeightMatrix w = build_weights(cfg.topology);
  const RidgeProblem pb = build_problem(cfg.problem);
  const CompressorKind kind = compressor_of(cfg);

  RunOptions opts;
  opts.K = cfg.K;
  opts.trace_every = cfg.trace_every;
  opts.seed = cfg.seed;
  opts.x0_seed = cfg.problem.seed;
  opts.policy = policy_for(cfg.threads);
  o.result = run(cfg.algorithm, pb, w, cfg.hyper, kind, opts);
  o.fit = empirical_rate(o.result.trace);

  if (cfg.certify) {
    try {
      o.certificate = certify_config(cfg).params;
    } catch (const std::exception& e) {
      o.certificate_error = e.what();
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string file = cfg.output.empty() ? cfg.name + ".csv" : cfg.output;
    o.trace_path = (std::filesystem::path(out_dir) / file).string();
    std::ofstream f(o.trace_path);
    write_trace_csv(f, o.result.trace);
    if (o.certificate) {
      o.certificate_path = (std::filesystem::path(out_dir) / (cfg.name + ".cert.json")).string();
      std::ofstream c(o.certificate_path);
      c << certificate_json(*o.certificate) << '\n';
    }
  }
  return o;
}

std::string summary_line(const ExperimentOutcome& o) {
  const auto& r = o.result;
  const double last = r.trace.empty() ? 0.0 : r.trace.back().residual;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s algorithm=%s compressor=%s iterations=%d final_residual=%.6e rate=%.9f r2=%.6f "
                "total_bits=%lld status=%s",
                o.cfg.name.c_str(), to_string(o.cfg.algorithm).c_str(), to_string(r.kind).c_str(), r.iterations,
                last, o.fit.rate, o.fit.r_squared, static_cast<long long>(r.total_bits),
                r.diverged ? "diverged" : "ok");
  std::string s = buf;
  if (o.certificate) {
    std::snprintf(buf, sizeof buf, " certified_gamma=%.6e certified_eta=%.6e cert=%s", o.certificate->gamma,
                  o.certificate->eta, o.certificate->certificate.ok() ? "ok" : "failed");
    s += buf;
  } else if (!o.certificate_error.empty()) {
    s += " cert_error=\"" + o.certificate_error + "\"";
  }
  return s;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = make_presets();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

std::string preset_listing() {
  std::ostringstream os;
  for (const auto& p : presets()) {
    os << p.name << ": " << p.description << '\n';
    for (const auto& c : p.runs) {
      os << "  " << c.name << "  " << to_string(c.algorithm) << ' ' << c.compressor << "  alpha=" << c.hyper.alpha_x
         << " gamma=" << c.hyper.gamma << " eta=" << c.hyper.eta;
      if (c.hyper.beta_x != 1.0) os << " beta=" << c.hyper.beta_x;
      os << '\n';
    }
  }
  os << "note: LEAD baseline rows are not included.\n"
     << "note: K defaults to 5000 (trace every 10); the original horizons are not stated.\n";
  return os.str();
}

void check_comparable(const std::vector<ExperimentConfig>& cfgs) {
  if (cfgs.empty()) throw ConfigError("compare", "no configs given");
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (!same_topology(cfgs[0].topology, cfgs[i].topology))
      throw ConfigError("topology", "config " + std::to_string(i) + " uses a different topology");
    if (cfgs[0].problem.seed != cfgs[i].problem.seed)
      throw ConfigError("problem.seed", "config " + std::to_string(i) + " uses problem seed " +
                                            std::to_string(cfgs[i].problem.seed) + ", expected " +
                                            std::to_string(cfgs[0].problem.seed));
    if (!same_problem(cfgs[0].problem, cfgs[i].problem))
      throw ConfigError("problem", "config " + std::to_string(i) + " describes a different problem");
  }
}

std::string merge_traces(const std::vector<ExperimentOutcome>& outcomes) {
  std::vector<ExperimentConfig> cfgs;
  for (const auto& o : outcomes) cfgs.push_back(o.cfg);
  check_comparable(cfgs);
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const auto& o : outcomes) {
    std::string l = to_string(o.cfg.algorithm) + "/" + to_string(o.result.kind);
    if (int c = seen[l]++; c > 0) l += "#" + std::to_string(c + 1);
    labels.push_back(l);
  }
  std::set<int> ks;
  std::vector<std::map<int, double>> cols(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    for (const auto& r : outcomes[i].result.trace) {
      ks.insert(r.k);
      cols[i][r.k] = r.residual;
    }
  std::ostringstream os;
  os << 'k';
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  for (int k : ks) {
    os << k;
    for (const auto& c : cols) {
      os << ',';
      if (auto it = c.find(k); it != c.end()) os << g17(it->second);
    }
    os << '\n';
  }
  return os.str();
}

CertifyReport certify_config(const ExperimentConfig& cfg) {
  validate(cfg);
  const WeightMatrix w = build_weights(cfg.topology);
  const RidgeProblem pb = build_problem(cfg.problem);
  const CompressorKind kind = compressor_of(cfg);
  const SpectralInfo spec = spectral_info(w);
  const ProblemConstants pc = constants(pb);
  CertifyReport rep;
  rep.profile = resolve_profile(kind, pb.p, 2000, cfg.seed);
  const bool ef = uses_error_feedback(cfg.algorithm);
  if (ef) {
    if (std::abs(rep.profile.r - 1.0) > 1e-12)
      throw InfeasibleError("error feedback analysis needs a contractive profile with r = 1; " +
                            to_string(kind) + " has r = " + g17(rep.profile.r));
    rep.params = sufficient_params_ef(pc, pb.n, spec, rep.profile, cfg.hyper.alpha_x, cfg.hyper.alpha_y);
  } else {
    const double cap = 1.0 / rep.profile.r;
    rep.params = sufficient_params(pc, pb.n, spec, rep.profile, std::min(cfg.hyper.alpha_x, cap),
                                   std::min(cfg.hyper.alpha_y, cap));
  }
  rep.json = certificate_json(rep.params);

  // the configured step sizes, judged by the same error matrix
  try {
    ErrorSystemConstants k = rep.params.consts;
    k.gamma = cfg.hyper.gamma;
    k.eta = cfg.hyper.eta;
    const ErrorSystem sys = ef ? build_B(k) : build_A(k);
    rep.configured_rho = spectral_radius_nonneg(sys.M);
  } catch (const std::exception& e) {
    rep.configured_note = e.what();
  }
  return rep;
}

}  // namespace cgt
