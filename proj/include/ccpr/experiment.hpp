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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ccpr/codec.hpp"
#include "ccpr/problem.hpp"
#include "ccpr/trainer.hpp"

namespace ccpr {

struct ExperimentConfig {
  std::string name = "custom";
  ProblemParams problem;
  std::size_t blocks = 40;   // K
  std::size_t workers = 40;
  std::size_t memory = 6;    // M
  TrainConfig train;         // train.policy and train.seed are set per run
  // Persistent stragglers (persistent profile) or initially slow workers
  // (markov profile), drawn per replica.
  std::size_t stragglers = 15;
  // random: a uniform subset per replica; first: worker ids 1..stragglers.
  enum class StragglerSet { random, first } straggler_set = StragglerSet::first;
  std::vector<OrderPolicy> policies;
  std::size_t replicas = 10;
  std::uint64_t seed = 1;
  std::size_t jobs = 0;      // 0: hardware concurrency
  std::filesystem::path output_dir;  // empty: keep results in memory only
  bool baseline = true;      // also run plain full-gradient descent per replica

  // table1 only
  std::vector<double> table_q;
  std::size_t table_a_th = 2;
};

// Throws ConfigError on inconsistent settings.
void validate(const ExperimentConfig& config);

std::vector<std::string> preset_names();
// fig3, fig4, fig5, fig6, table1. Throws ConfigError for unknown names.
ExperimentConfig preset(std::string_view name);

// Applies one key = value setting. Unknown keys and malformed values throw
// ConfigError. The "preset" key replaces the whole config with that preset.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Reads a key = value file (INI syntax, '#' or ';' comments). A preset key
// is applied first so other keys override it.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

// Human-readable dump of every setting, re-loadable with load_config.
std::string describe(const ExperimentConfig& config);

struct RunRecord {
  std::size_t policy = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;  // latency stream
  TrainResult result;
};

struct SweepResult {
  std::vector<OrderPolicy> policies;
  std::size_t replicas = 0;
  std::size_t iterations = 0;
  std::size_t blocks = 0;
  std::size_t age_threshold = 2;  // used for the objective column
  std::vector<std::vector<RunRecord>> runs;  // [policy][replica]
  std::vector<std::vector<Losses>> baseline;  // [replica][t], plain GD

  // Aggregates over replicas.
  std::vector<std::vector<double>> test_loss_mean;  // [policy][t]
  std::vector<std::vector<double>> test_loss_std;
  std::vector<std::vector<double>> average_age_mean;  // [policy][k]
  std::vector<double> objective_mean;                 // [policy]
  std::vector<double> objective_std;

  bool empty() const { return runs.empty(); }
};

// Seeds of replica r: problem, code and straggler draws depend on
// (master, r) only, so every policy of a replica faces the same instance;
// the latency stream depends on (master, policy, r).
struct ReplicaSeeds {
  std::uint64_t problem;
  std::uint64_t code;
  std::uint64_t stragglers;
};
ReplicaSeeds replica_seeds(std::uint64_t master, std::size_t replica);
std::uint64_t latency_seed(std::uint64_t master, std::size_t policy, std::size_t replica);

// Runs replicas x policies simulations (replicas in parallel), fills the
// aggregates and, when output_dir is set, writes raw/aggregate CSVs and a
// checksum manifest. Throws ConfigError for invalid configs and
// std::runtime_error for I/O failures.
SweepResult run_experiment(const ExperimentConfig& config);

// Recomputes the aggregates from the per-run results.
void aggregate(SweepResult& result);

struct ObjectiveGrid {
  std::vector<double> q_values;
  std::vector<OrderPolicy> policies;
  std::size_t age_threshold = 2;
  std::vector<std::vector<double>> mean;  // [q][policy]
  std::vector<std::vector<double>> std;
  std::vector<std::vector<double>> max_average_age;  // [q][policy], replica-mean ages
};

// Mean objective per (q, policy). Each q reuses the replica instances and
// seeds of the base config. Writes table1.csv under output_dir when set.
ObjectiveGrid table1_grid(const ExperimentConfig& base, const std::vector<double>& q_values,
                          std::size_t age_threshold, std::size_t replicas);

void write_table1_csv(std::ostream& out, const ObjectiveGrid& grid);

enum class PlotKind { convergence, age_bars };

// convergence.csv: iteration, then <label>_mean,<label>_std per policy
// (plus full_gd when the baseline was run). age_bars.csv: block, then one
// replica-mean average age column per policy. Returns the written path.
std::filesystem::path emit_plotdata(const SweepResult& result, PlotKind kind,
                                    const std::filesystem::path& dir);

void write_convergence_csv(std::ostream& out, const SweepResult& result);
void write_age_bars_csv(std::ostream& out, const SweepResult& result);

// Directory-safe policy label: rcs, rcs1, adaptive_a2.
std::string policy_slug(const OrderPolicy& policy);

}  // namespace ccpr
