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

// cgt run|preset|compare|verify|certify

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgt/harness.h"

namespace {

int report_divergence(const cgt::ExperimentOutcome& o) {
  if (!o.result.diverged) return cgt::kExitOk;
  std::cerr << "error: " << o.result.diagnostic;
  if (!o.trace_path.empty()) std::cerr << " (partial trace in " << o.trace_path << ")";
  std::cerr << '\n';
  return cgt::kExitDiverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed gradient tracking experiments"};
  app.require_subcommand(1);
  std::string out_dir = cgt::default_out_dir();
  app.add_option("--out", out_dir, "output directory (default $CGT_OUT_DIR or .)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  std::string preset_name;
  int preset_k = -1;
  auto* preset = app.add_subcommand("preset", "run a named preset ('list' to show them)");
  preset->add_option("name", preset_name)->required();
  preset->add_option("-K", preset_k, "override the iteration count");

  std::vector<std::string> compare_paths;
  std::string merged_name = "compare.csv";
  auto* compare = app.add_subcommand("compare", "run configs and merge their residual traces");
  compare->add_option("configs", compare_paths)->required()->check(CLI::ExistingFile);
  compare->add_option("--merged", merged_name, "merged CSV file name");

  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  verify->add_option("--seed", verify_seed);

  std::string certify_path;
  auto* certify = app.add_subcommand("certify", "derive certified step sizes for a config");
  certify->add_option("config", certify_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto o = cgt::run_experiment(cgt::load_config(config_path), out_dir);
      std::cout << cgt::summary_line(o) << '\n';
      return report_divergence(o);
    }
    if (preset->parsed()) {
      if (preset_name == "list") {
        std::cout << cgt::preset_listing();
        return cgt::kExitOk;
      }
      int code = cgt::kExitOk;
      std::vector<cgt::ExperimentOutcome> outs;
      for (auto cfg : cgt::find_preset(preset_name).runs) {
        if (preset_k >= 0) cfg.K = preset_k;
        outs.push_back(cgt::run_experiment(cfg, out_dir));
        std::cout << cgt::summary_line(outs.back()) << '\n';
        if (int c = report_divergence(outs.back())) code = c;
      }
      if (outs.size() > 1) {
        const auto path = std::filesystem::path(out_dir) / (preset_name + ".merged.csv");
        std::ofstream(path) << cgt::merge_traces(outs);
        std::cout << "merged: " << path.string() << '\n';
      }
      return code;
    }
    if (compare->parsed()) {
      std::vector<cgt::ExperimentConfig> cfgs;
      for (const auto& p : compare_paths) cfgs.push_back(cgt::load_config(p));
      cgt::check_comparable(cfgs);  // before any computation
      std::vector<cgt::ExperimentOutcome> outs;
      int code = cgt::kExitOk;
      for (const auto& c : cfgs) {
        outs.push_back(cgt::run_experiment(c, out_dir));
        std::cout << cgt::summary_line(outs.back()) << '\n';
        if (int e = report_divergence(outs.back())) code = e;
      }
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / merged_name;
      std::ofstream(path) << cgt::merge_traces(outs);
      std::cout << "merged: " << path.string() << '\n';
      return code;
    }
    if (verify->parsed()) {
      bool ok = true;
      for (const auto& c : cgt::verify_suite(verify_seed)) {
        const char* tag = c.passed ? (c.expected_failure ? "XFAIL" : "PASS") : "FAIL";
        std::printf("%-5s %s: %s\n", tag, c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
      }
      return ok ? cgt::kExitOk : cgt::kExitVerify;
    }
    if (certify->parsed()) {
      const auto cfg = cgt::load_config(certify_path);
      const auto rep = cgt::certify_config(cfg);
      std::cout << rep.json << '\n';
      std::printf("certified gamma=%.6e eta=%.6e verdict=%s\n", rep.params.gamma, rep.params.eta,
                  rep.params.certificate.ok() ? "ok" : "failed");
      if (rep.configured_rho)
        std::printf("configured gamma=%g eta=%g: rho(M)=%.12f\n", cfg.hyper.gamma, cfg.hyper.eta,
                    *rep.configured_rho);
      else
        std::printf("configured parameters outside the analysis: %s\n", rep.configured_note.c_str());
      return rep.params.certificate.ok() ? cgt::kExitOk : cgt::kExitVerify;
    }
  } catch (const cgt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cgt::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cgt::kExitConfig;
  }
  return cgt::kExitOk;
}
