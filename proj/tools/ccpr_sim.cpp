// Copyright 2026 The ccpr-sim Authors. All Rights Reserved.
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

// ccpr_sim: experiment driver for coded partial-recovery gradient descent.
//
//   ccpr_sim run --config exp.ini [--seed N] [--replicas R] [--out DIR] [--set key=value]...
//   ccpr_sim preset fig3|fig4|fig5|fig6|table1 [--seed N] [--replicas R] [--out DIR]
//   ccpr_sim table1 --a-th 2 --q 0.1,0.2,0.3 [--replicas R] [--seed N] [--out DIR]
//
// Exit status: 0 success, 2 configuration error, 3 runtime error.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccpr/error.hpp"
#include "ccpr/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--replicas", o.replicas, "Monte-Carlo replicas per policy");
  cmd->add_option("--jobs", o.jobs, "Parallel replicas (0: all cores)");
  cmd->add_option("--out", o.out, "Output directory (default: $CCPR_OUTPUT_DIR/<name>)");
  cmd->add_option("--set", o.settings, "Override a config key, e.g. --set q=0.2");
}

void apply(ccpr::ExperimentConfig& c, const Overrides& o) {
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ccpr::ConfigError("--set expects key=value, got '" + kv + "'");
    ccpr::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.replicas) c.replicas = *o.replicas;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.out) {
    c.output_dir = *o.out;
  } else if (c.output_dir.empty()) {
    const char* env = std::getenv("CCPR_OUTPUT_DIR");
    c.output_dir = std::filesystem::path(env && *env ? env : "ccpr_out") / c.name;
  }
  ccpr::validate(c);
}

void report(const ccpr::ExperimentConfig& c, const ccpr::SweepResult& r) {
  std::cout << "experiment " << c.name << ": " << c.replicas << " replica(s), T="
            << c.train.iterations << ", q=" << c.train.q << ", output " << c.output_dir.string()
            << '\n';
  std::cout << std::left << std::setw(26) << "policy" << std::setw(16) << "final_test_loss"
            << std::setw(14) << "objective" << "max_avg_age\n";
  for (std::size_t p = 0; p < r.policies.size(); ++p) {
    double worst = 0.0;
    for (double a : r.average_age_mean[p]) worst = std::max(worst, a);
    std::cout << std::setw(26) << r.policies[p].label() << std::setw(16)
              << r.test_loss_mean[p].back() << std::setw(14) << r.objective_mean[p] << worst
              << '\n';
  }
}

void report(const ccpr::ObjectiveGrid& g) {
  std::cout << std::left << std::setw(8) << "q";
  for (const auto& p : g.policies) std::cout << std::setw(26) << p.label();
  std::cout << '\n';
  for (std::size_t qi = 0; qi < g.q_values.size(); ++qi) {
    std::cout << std::setw(8) << g.q_values[qi];
    for (double v : g.mean[qi]) std::cout << std::setw(26) << std::fixed << std::setprecision(4) << v;
    std::cout << std::defaultfloat << '\n';
  }
}

int run_config(ccpr::ExperimentConfig c) {
  if (!c.table_q.empty()) {
    const auto grid = ccpr::table1_grid(c, c.table_q, c.table_a_th, c.replicas);
    report(grid);
    return 0;
  }
  const auto result = ccpr::run_experiment(c);
  report(c, result);
  return 0;
}

std::vector<double> parse_q_list(const std::string& text) {
  ccpr::ExperimentConfig scratch;
  ccpr::apply_setting(scratch, "table_q", text);
  return scratch.table_q;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded partial-recovery gradient descent simulator"};
  app.require_subcommand(1);

  Overrides run_o, preset_o, table_o;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a key = value file");
  run->add_option("--config", config_path, "Experiment config file")->required();
  add_common(run, run_o);

  std::string preset_name;
  auto* pre = app.add_subcommand("preset", "Run a built-in experiment preset");
  pre->add_option("name", preset_name, "fig3 | fig4 | fig5 | fig6 | table1")->required();
  add_common(pre, preset_o);

  std::size_t a_th = 2;
  std::string q_list = "0.1,0.2,0.3";
  std::string table_config;
  auto* table = app.add_subcommand("table1", "Objective grid over tolerance levels");
  table->add_option("--a-th", a_th, "Age threshold for the objective and the adaptive policy");
  table->add_option("--q", q_list, "Comma-separated tolerance levels");
  table->add_option("--config", table_config, "Base config file (default: table1 preset)");
  add_common(table, table_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      auto c = ccpr::load_config(config_path);
      apply(c, run_o);
      return run_config(std::move(c));
    }
    if (*pre) {
      auto c = ccpr::preset(preset_name);
      apply(c, preset_o);
      return run_config(std::move(c));
    }
    auto c = table_config.empty() ? ccpr::preset("table1") : ccpr::load_config(table_config);
    c.table_q = parse_q_list(q_list);
    c.table_a_th = a_th;
    for (auto& p : c.policies)
      if (p.kind == ccpr::OrderPolicy::Kind::adaptive) p.age_threshold = a_th;
    apply(c, table_o);
    return run_config(std::move(c));
  } catch (const ccpr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
