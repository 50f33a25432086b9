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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgt/harness.h"
#include "doctest.h"
#include "json.hpp"

using namespace cgt;

namespace {

std::string field_of(const std::string& text) {
  try {
    const ExperimentConfig c = parse_config(text);
    validate(c);
    build_weights(c.topology);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::filesystem::path scratch_dir(const std::string& leaf) {
  auto d = std::filesystem::temp_directory_path() / ("cgt_harness_" + leaf);
  std::filesystem::remove_all(d);
  return d;
}

ExperimentConfig small(Algorithm a, const std::string& comp) {
  ExperimentConfig c;
  c.name = "small";
  c.algorithm = a;
  c.compressor = comp;
  c.K = 120;
  c.trace_every = 7;
  c.hyper.eta = 0.01;
  c.hyper.gamma = 0.5;
  return c;
}

struct Row {
  const char* name;
  bool directed;
  Algorithm alg;
  const char* comp;
  double alpha, gamma, eta, beta;
};

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
[topology]
n = 6
directed = true
p = 0.2
[problem]
n = 6
p = 4
seed = 9
[algorithm]
name = efcgt-ref
compressor = topk:k=2
K = 50
trace_every = 5
[hyper]
eta = 0.003
gamma = 0.4
beta_x = 0.5
[output]
path = t.csv
)");
  CHECK(c.topology.n == 6);
  CHECK(c.topology.directed);
  CHECK(c.topology.p == std::vector<double>{0.2});
  CHECK(c.problem.p == 4);
  CHECK(c.problem.seed == 9);
  CHECK(c.algorithm == Algorithm::kEfcgtReference);
  CHECK(c.K == 50);
  CHECK(c.hyper.eta == 0.003);
  CHECK(c.hyper.beta_x == 0.5);
  CHECK(c.hyper.beta_y == 1.0);
  CHECK(c.output == "t.csv");
  CHECK_NOTHROW(validate(c));

  const ExperimentConfig d = parse_config("");
  CHECK(d.problem.seed == 5);
  CHECK(d.K == 5000);
  CHECK(d.topology.n == 10);
}

TEST_CASE("config errors name the field") {
  CHECK(field_of("[topology]\nn = 8\n") == "problem.n");
  CHECK(field_of("[hyper]\neta = -1\n") == "hyper.eta");
  CHECK(field_of("[hyper]\ngamma = 1.5\n") == "hyper.gamma");
  CHECK(field_of("[hyper]\neta = abc\n") == "hyper.eta");
  CHECK(field_of("[algorithm]\nname = lead\n") == "algorithm.name");
  CHECK(field_of("[algorithm]\ncompressor = topk:k=0\n") == "algorithm.compressor");
  CHECK(field_of("[algorithm]\nK = -3\n") == "algorithm.K");
  CHECK(field_of("[topology]\nkind = star\n") == "topology.kind");
  CHECK(field_of("[topology]\np = 0.1, 0.2\n") == "topology.p");
  CHECK(field_of("[topology]\nweights = laplacian\na = 0.6\n") == "topology.a");
  CHECK(field_of("[topology]\ncolour = red\n") == "topology.colour");
  CHECK(field_of("[extra]\nx = 1\n") == "extra");
  CHECK(field_of("[hyper]\neta_agents = 0.1, 0.2\n") == "hyper.eta_agents");
  CHECK(field_of("[problem]\nrho = 0\n") == "problem.rho");
  CHECK(field_of("[hyper]\neta = 0.01\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("to_ini round trips") {
  for (const auto& p : presets())
    for (const auto& c : p.runs) {
      const ExperimentConfig back = parse_config(to_ini(c));
      CHECK(to_ini(back) == to_ini(c));
      CHECK(back.hyper.eta == c.hyper.eta);
      CHECK(back.hyper.beta_y == c.hyper.beta_y);
      CHECK(back.algorithm == c.algorithm);
      CHECK(back.compressor == c.compressor);
    }
}

TEST_CASE("presets carry the published settings") {
  const auto cgt = Algorithm::kCgtEfficient, ef = Algorithm::kEfcgtEfficient;
  const Row rows[] = {
      {"fig1-cgt", false, cgt, "quant:b=2,q=inf", 1, 1, 0.09, 1},
      {"fig2-cgt-directed", true, cgt, "quant:b=2,q=inf", 1, 1, 0.0047, 1},
      {"fig2-gt-directed", true, Algorithm::kGt, "identity", 1, 1, 0.0047, 1},
      {"fig3a-cgt-top1", false, cgt, "topk:k=1", 1, 0.6, 0.11, 1},
      {"fig3a-efcgt-top1", false, ef, "topk:k=1", 1, 0.6, 0.12, 1},
      {"fig3b-cgt-top1", true, cgt, "topk:k=1", 1, 0.5, 0.00034, 1},
      {"fig3b-efcgt-top1", true, ef, "topk:k=1", 1, 1, 0.0043, 1},
      {"fig4a-cgt-rand1", false, cgt, "randk:k=1", 1, 0.1, 0.11, 1},
      {"fig4a-efcgt-rand1", false, ef, "randk:k=1", 1, 0.1, 0.11, 1},
      {"fig4b-cgt-rand1", true, cgt, "randk:k=1", 1, 0.2, 0.0001, 1},
      {"fig4b-efcgt-rand1", true, ef, "randk:k=1", 1, 0.3, 0.0012, 1},
      {"fig5-cgt-sign", true, cgt, "normsign:q=inf", 0.05, 1, 0.01, 1},
      {"fig5-efcgt-sign", true, ef, "normsign:q=inf", 0.05, 1, 0.02, 0.01},
      {"fig5-cgt-rsign", true, cgt, "normsign-rescaled:q=inf,r=20", 1, 0.2, 0.0007, 1},
      {"fig5-efcgt-rsign", true, ef, "normsign-rescaled:q=inf,r=20", 1, 0.4, 0.0019, 0.01},
  };
  int found = 0;
  for (const auto& p : presets())
    for (const auto& c : p.runs) {
      CHECK_NOTHROW(validate(c));
      CHECK(c.problem.n == 10);
      CHECK(c.problem.p == 20);
      CHECK(c.problem.rho == 0.01);
      for (const auto& r : rows) {
        if (c.name != r.name) continue;
        ++found;
        INFO(r.name);
        CHECK(c.topology.directed == r.directed);
        CHECK(c.algorithm == r.alg);
        CHECK(c.compressor == r.comp);
        CHECK(c.hyper.alpha_x == r.alpha);
        CHECK(c.hyper.alpha_y == r.alpha);
        CHECK(c.hyper.gamma == r.gamma);
        CHECK(c.hyper.eta == r.eta);
        CHECK(c.hyper.beta_x == r.beta);
        CHECK(c.hyper.beta_y == r.beta);
      }
    }
  CHECK(found == 15);
  CHECK(find_preset("fig3b").runs.size() == 2);
  CHECK_THROWS_AS(find_preset("fig9"), ConfigError);
  CHECK(preset_listing().find("fig5-efcgt-rsign") != std::string::npos);
}

TEST_CASE("trace CSV is deterministic and complete") {
  const auto dir = scratch_dir("csv");
  ExperimentConfig c = small(Algorithm::kCgtEfficient, "randk:k=2");
  const ExperimentOutcome a = run_experiment(c, dir.string());
  std::ifstream f(a.trace_path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("k,residual,opt_error,consensus_error,tracking_error,compress_error_x,compress_error_y,"
                   "ef_error_x,ef_error_y,bits_cumulative\n",
                   0) == 0);
  int lines = 0;
  std::string last;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    ++lines;
    last = l;
  }
  // header, k = 0, 7, ..., 119, and k = 120
  CHECK(lines == 1 + 18 + 1);
  CHECK(last.rfind("120,", 0) == 0);

  const ExperimentOutcome b = run_experiment(c, "");
  CHECK(trace_csv(b.result.trace) == text);
  CHECK(b.trace_path.empty());

  c.threads = 0;
  CHECK(trace_csv(run_experiment(c, "").result.trace) == text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary and certificate output") {
  const auto dir = scratch_dir("cert");
  ExperimentConfig c = small(Algorithm::kCgtEfficient, "topk:k=1");
  c.certify = true;
  const ExperimentOutcome o = run_experiment(c, dir.string());
  REQUIRE(o.certificate);
  CHECK(o.certificate->certificate.ok());
  CHECK(std::filesystem::exists(o.certificate_path));
  std::ifstream f(o.certificate_path);
  const auto js = nlohmann::json::parse(f);
  CHECK(js["variant"] == "plain");
  const std::string s = summary_line(o);
  CHECK(s.find("status=ok") != std::string::npos);
  CHECK(s.find("cert=ok") != std::string::npos);
  std::filesystem::remove_all(dir);

  // rescaling is needed before the error feedback analysis applies
  ExperimentConfig e = small(Algorithm::kEfcgtEfficient, "quant:b=2,q=inf");
  CHECK_THROWS_AS(certify_config(e), InfeasibleError);
  e.compressor = "topk:k=1";
  const CertifyReport rep = certify_config(e);
  CHECK(rep.params.certificate.ok());
  CHECK(rep.configured_rho.has_value());
}

TEST_CASE("comparisons need the same network and problem") {
  ExperimentConfig a = small(Algorithm::kCgtEfficient, "topk:k=1");
  ExperimentConfig b = small(Algorithm::kEfcgtEfficient, "topk:k=1");
  CHECK_NOTHROW(check_comparable({a, b}));
  b.problem.seed = 6;
  try {
    check_comparable({a, b});
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "problem.seed");
  }
  b = a;
  b.topology.directed = true;
  CHECK_THROWS_AS(check_comparable({a, b}), ConfigError);
  CHECK_THROWS_AS(check_comparable({}), ConfigError);

  b = a;
  b.algorithm = Algorithm::kGt;
  b.compressor = "identity";
  b.trace_every = 10;
  const std::string m = merge_traces({run_experiment(a, ""), run_experiment(b, "")});
  std::istringstream in(m);
  std::string head;
  std::getline(in, head);
  CHECK(head == "k,cgt/topk:k=1,gt/identity");
  int rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  // union of {0,7,...,119,120} and {0,10,...,120}
  CHECK(rows == 29);
}

TEST_CASE("first hit") {
  std::vector<TraceRecord> t(4);
  const double res[] = {1.0, 1e-3, 1e-7, 1e-5};
  for (int i = 0; i < 4; ++i) {
    t[i].k = 10 * i;
    t[i].residual = res[i];
  }
  CHECK(first_hit(t, 1e-6) == 20);
  CHECK(first_hit(t, 1e-2) == 10);
  CHECK(first_hit(t, 1e-9) == -1);
}

TEST_CASE("output directory default") {
  setenv(kOutDirEnv, "/tmp/somewhere", 1);
  CHECK(default_out_dir() == "/tmp/somewhere");
  unsetenv(kOutDirEnv);
  CHECK(default_out_dir() == ".");
}
