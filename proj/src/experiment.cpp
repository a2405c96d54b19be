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

#include "ccpr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccpr/error.hpp"
#include "ccpr/io.hpp"
#include "ccpr/random.hpp"

namespace ccpr {

namespace {

struct Instance {
  RegressionProblem problem;
  BlockPartition partition;
  AssignmentMatrix assignment;
  StragglerProfile profile;
  ReplicaSeeds seeds;
};

Instance make_instance(const ExperimentConfig& c, std::size_t replica) {
  const ReplicaSeeds seeds = replica_seeds(c.seed, replica);
  RegressionProblem problem = generate_problem(c.problem, seeds.problem);
  BlockPartition partition = partition_blocks(problem, c.blocks);
  AssignmentMatrix assignment = build_rcs(c.blocks, c.workers, c.memory, seeds.code);
  StragglerProfile profile = c.train.profile;
  std::vector<WorkerId> chosen;
  if (c.straggler_set == ExperimentConfig::StragglerSet::random) {
    chosen = draw_worker_subset(c.workers, c.stragglers, seeds.stragglers);
  } else {
    for (WorkerId i = 0; i < c.stragglers; ++i) chosen.push_back(i);
  }
  if (profile.kind == StragglerProfile::Kind::persistent) profile.persistent_set = chosen;
  if (profile.kind == StragglerProfile::Kind::markov) profile.initial_slow = chosen;
  return {std::move(problem), std::move(partition), std::move(assignment), std::move(profile),
          seeds};
}

TrainConfig run_config(const ExperimentConfig& c, const Instance& inst, std::size_t policy,
                       std::size_t replica) {
  TrainConfig t = c.train;
  t.policy = c.policies[policy];
  t.profile = inst.profile;
  t.seed = latency_seed(c.seed, policy, replica);
  return t;
}

// Runs body(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// exception after all threads finish.
template <typename Body>
void parallel_for(std::size_t n, std::size_t jobs, Body body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation; 0 for fewer than two values.
double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

std::string replica_dir(std::size_t replica) {
  std::ostringstream s;
  s << "replica_" << std::setw(3) << std::setfill('0') << replica;
  return s.str();
}

std::ostringstream precise_stream() {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10);
  return s;
}

std::string seed_header(const ExperimentConfig& c, const Instance& inst, const OrderPolicy& p,
                        std::size_t replica, std::uint64_t latency) {
  std::ostringstream s;
  s << "# experiment=" << c.name << " policy=" << p.label() << " replica=" << replica
    << " master_seed=" << c.seed << " problem_seed=" << inst.seeds.problem
    << " code_seed=" << inst.seeds.code << " straggler_seed=" << inst.seeds.stragglers
    << " latency_seed=" << latency << '\n';
  return s.str();
}

void write_raw_run(const ExperimentConfig& c, const Instance& inst, const RunRecord& run) {
  const OrderPolicy& p = c.policies[run.policy];
  const auto dir = c.output_dir / "raw" / policy_slug(p) / replica_dir(run.replica);
  const std::string header = seed_header(c, inst, p, run.replica, run.seed);

  std::ostringstream metrics;
  metrics << header;
  write_metrics_csv(metrics, run.result.records);
  write_file(dir / "metrics.csv", metrics.str());

  std::ostringstream ages;
  ages << header;
  run.result.ages.write_ages_csv(ages);
  write_file(dir / "ages.csv", ages.str());

  std::ostringstream summary;
  summary << header;
  const std::size_t a_th =
      p.kind == OrderPolicy::Kind::adaptive ? p.age_threshold : c.table_a_th;
  run.result.ages.write_summary_csv(summary, a_th);
  write_file(dir / "summary.csv", summary.str());
}

void write_instance(const ExperimentConfig& c, const Instance& inst, std::size_t replica) {
  const auto dir = c.output_dir / "raw" / "instances" / replica_dir(replica);
  std::ostringstream a;
  inst.assignment.write_csv(a);
  write_file(dir / "assignment.csv", a.str());
  std::ostringstream s;
  s << "worker\n";
  const auto& ids = inst.profile.kind == StragglerProfile::Kind::markov
                        ? inst.profile.initial_slow
                        : inst.profile.persistent_set;
  for (WorkerId i : ids) s << i + 1 << '\n';
  write_file(dir / "stragglers.csv", s.str());
}

void write_manifest(const std::filesystem::path& out) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(out / "raw"))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::ostringstream m;
  m << "file,fnv1a64\n";
  for (const auto& f : files)
    m << std::filesystem::relative(f, out).generic_string() << ',' << std::hex
      << std::setw(16) << std::setfill('0') << file_checksum(f) << std::dec << '\n';
  write_file(out / "manifest.csv", m.str());
}

std::mutex log_mutex;

void log_exhaustion(const ExperimentConfig& c, const RunRecord& run) {
  if (run.result.exhausted_iterations == 0) return;
  std::lock_guard lock(log_mutex);
  std::cerr << "warning: " << c.name << " " << c.policies[run.policy].label() << " replica "
            << run.replica << ": " << run.result.exhausted_iterations
            << " iteration(s) ran out of results before reaching the recovery target\n";
}

}  // namespace

std::string policy_slug(const OrderPolicy& p) {
  switch (p.kind) {
    case OrderPolicy::Kind::static_order:
      return "rcs";
    case OrderPolicy::Kind::fixed_shift:
      return p.period == 0 ? "rcs1" : "rcs1_p" + std::to_string(p.period);
    case OrderPolicy::Kind::adaptive:
      return "adaptive_a" + std::to_string(p.age_threshold);
  }
  return "unknown";
}

ReplicaSeeds replica_seeds(std::uint64_t master, std::size_t replica) {
  return {derive_seed(master, {static_cast<std::uint64_t>(Stream::problem), replica}),
          derive_seed(master, {static_cast<std::uint64_t>(Stream::code), replica}),
          derive_seed(master, {static_cast<std::uint64_t>(Stream::stragglers), replica})};
}

std::uint64_t latency_seed(std::uint64_t master, std::size_t policy, std::size_t replica) {
  return derive_seed(master, {static_cast<std::uint64_t>(Stream::latency), policy, replica});
}

void aggregate(SweepResult& r) {
  const std::size_t np = r.runs.size();
  r.test_loss_mean.assign(np, {});
  r.test_loss_std.assign(np, {});
  r.average_age_mean.assign(np, {});
  r.objective_mean.assign(np, 0.0);
  r.objective_std.assign(np, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& runs = r.runs[p];
    if (runs.empty()) continue;
    for (std::size_t t = 0; t < r.iterations; ++t) {
      std::vector<double> losses;
      for (const auto& run : runs) losses.push_back(run.result.records.at(t).test_loss);
      r.test_loss_mean[p].push_back(mean_of(losses));
      r.test_loss_std[p].push_back(std_of(losses));
    }
    std::vector<std::vector<double>> per_block(r.blocks);
    std::vector<double> objectives;
    for (const auto& run : runs) {
      const auto avg = run.result.ages.average_ages();
      for (std::size_t k = 0; k < r.blocks; ++k) per_block[k].push_back(avg[k]);
      objectives.push_back(run.result.ages.objective(r.age_threshold));
    }
    for (const auto& xs : per_block) r.average_age_mean[p].push_back(mean_of(xs));
    r.objective_mean[p] = mean_of(objectives);
    r.objective_std[p] = std_of(objectives);
  }
}

SweepResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  const bool write = !c.output_dir.empty();
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec || !std::filesystem::is_directory(c.output_dir))
      throw std::runtime_error("cannot create output directory " + c.output_dir.string());
    write_file(c.output_dir / "config.txt", describe(c));
  }

  SweepResult result;
  result.policies = c.policies;
  result.replicas = c.replicas;
  result.iterations = c.train.iterations;
  result.blocks = c.blocks;
  result.age_threshold = c.table_a_th;
  result.runs.assign(c.policies.size(), std::vector<RunRecord>(c.replicas));
  if (c.baseline) result.baseline.assign(c.replicas, {});

  parallel_for(c.replicas, c.jobs, [&](std::size_t replica) {
    const Instance inst = make_instance(c, replica);
    if (write) write_instance(c, inst, replica);
    for (std::size_t p = 0; p < c.policies.size(); ++p) {
      const TrainConfig tc = run_config(c, inst, p, replica);
      RunRecord run{p, replica, tc.seed, train(inst.problem, inst.partition, inst.assignment, tc)};
      log_exhaustion(c, run);
      if (write) write_raw_run(c, inst, run);
      result.runs[p][replica] = std::move(run);
    }
    if (c.baseline)
      result.baseline[replica] = gradient_descent(inst.problem, c.train.eta, c.train.iterations);
  });

  aggregate(result);

  if (write) {
    emit_plotdata(result, PlotKind::convergence, c.output_dir);
    emit_plotdata(result, PlotKind::age_bars, c.output_dir);
    auto obj = precise_stream();
    obj << "policy,replica,objective,exhausted_iterations\n";
    for (const auto& runs : result.runs)
      for (const auto& run : runs)
        obj << c.policies[run.policy].label() << ',' << run.replica << ','
            << run.result.ages.objective(result.age_threshold) << ','
            << run.result.exhausted_iterations << '\n';
    write_file(c.output_dir / "objectives.csv", obj.str());
    write_manifest(c.output_dir);
  }
  return result;
}

ObjectiveGrid table1_grid(const ExperimentConfig& base, const std::vector<double>& q_values,
                          std::size_t age_threshold, std::size_t replicas) {
  ExperimentConfig c = base;
  c.replicas = replicas;
  c.table_q = q_values;
  c.table_a_th = age_threshold;
  validate(c);
  if (q_values.empty()) throw ConfigError("table1 needs at least one q value");

  const std::size_t nq = q_values.size();
  const std::size_t np = c.policies.size();
  // objective[q][policy][replica], ages[q][policy][replica][k]
  std::vector<std::vector<std::vector<double>>> objective(
      nq, std::vector<std::vector<double>>(np, std::vector<double>(replicas)));
  std::vector<std::vector<std::vector<std::vector<double>>>> ages(
      nq, std::vector<std::vector<std::vector<double>>>(np, std::vector<std::vector<double>>(replicas)));

  parallel_for(replicas, c.jobs, [&](std::size_t replica) {
    const Instance inst = make_instance(c, replica);
    for (std::size_t qi = 0; qi < nq; ++qi) {
      for (std::size_t p = 0; p < np; ++p) {
        TrainConfig tc = run_config(c, inst, p, replica);
        tc.q = q_values[qi];
        RunRecord run{p, replica, tc.seed, train(inst.problem, inst.partition, inst.assignment, tc)};
        log_exhaustion(c, run);
        objective[qi][p][replica] = run.result.ages.objective(age_threshold);
        ages[qi][p][replica] = run.result.ages.average_ages();
      }
    }
  });

  ObjectiveGrid grid;
  grid.q_values = q_values;
  grid.policies = c.policies;
  grid.age_threshold = age_threshold;
  for (std::size_t qi = 0; qi < nq; ++qi) {
    grid.mean.emplace_back();
    grid.std.emplace_back();
    grid.max_average_age.emplace_back();
    for (std::size_t p = 0; p < np; ++p) {
      grid.mean[qi].push_back(mean_of(objective[qi][p]));
      grid.std[qi].push_back(std_of(objective[qi][p]));
      double worst = 0.0;
      for (std::size_t k = 0; k < c.blocks; ++k) {
        std::vector<double> xs;
        for (const auto& a : ages[qi][p]) xs.push_back(a[k]);
        worst = std::max(worst, mean_of(xs));
      }
      grid.max_average_age[qi].push_back(worst);
    }
  }

  if (!c.output_dir.empty()) {
    write_file(c.output_dir / "config.txt", describe(c));
    std::ostringstream table;
    write_table1_csv(table, grid);
    write_file(c.output_dir / "table1.csv", table.str());
    auto detail = precise_stream();
    detail << "q,policy,replica,objective\n";
    for (std::size_t qi = 0; qi < nq; ++qi)
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t r = 0; r < replicas; ++r)
          detail << q_values[qi] << ',' << c.policies[p].label() << ',' << r << ','
                 << objective[qi][p][r] << '\n';
    write_file(c.output_dir / "table1_replicas.csv", detail.str());
  }
  return grid;
}

void write_table1_csv(std::ostream& out, const ObjectiveGrid& grid) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "q";
  for (const auto& p : grid.policies) out << ',' << p.label();
  for (const auto& p : grid.policies) out << ',' << p.label() << "_std";
  out << '\n';
  for (std::size_t qi = 0; qi < grid.q_values.size(); ++qi) {
    out << std::setprecision(6) << grid.q_values[qi]
        << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (double v : grid.mean[qi]) out << ',' << v;
    for (double v : grid.std[qi]) out << ',' << v;
    out << '\n';
  }
  out.precision(old);
}

void write_convergence_csv(std::ostream& out, const SweepResult& r) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "iteration";
  for (std::size_t p = 0; p < r.runs.size(); ++p)
    out << ',' << r.policies[p].label() << "_mean," << r.policies[p].label() << "_std";
  const bool with_baseline = !r.baseline.empty() && !r.runs.empty();
  if (with_baseline) out << ",full_gd_mean,full_gd_std";
  out << '\n';
  if (r.runs.empty()) {
    out.precision(old);
    return;
  }
  for (std::size_t t = 0; t < r.iterations; ++t) {
    out << t + 1;
    for (std::size_t p = 0; p < r.runs.size(); ++p)
      out << ',' << r.test_loss_mean[p][t] << ',' << r.test_loss_std[p][t];
    if (with_baseline) {
      std::vector<double> xs;
      for (const auto& b : r.baseline) xs.push_back(b.at(t).test);
      out << ',' << mean_of(xs) << ',' << std_of(xs);
    }
    out << '\n';
  }
  out.precision(old);
}

void write_age_bars_csv(std::ostream& out, const SweepResult& r) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "block";
  for (std::size_t p = 0; p < r.runs.size(); ++p) out << ',' << r.policies[p].label();
  out << '\n';
  if (!r.runs.empty()) {
    for (std::size_t k = 0; k < r.blocks; ++k) {
      out << k + 1;
      for (std::size_t p = 0; p < r.runs.size(); ++p) out << ',' << r.average_age_mean[p][k];
      out << '\n';
    }
  }
  out.precision(old);
}

std::filesystem::path emit_plotdata(const SweepResult& result, PlotKind kind,
                                    const std::filesystem::path& dir) {
  std::ostringstream s;
  std::filesystem::path path;
  if (kind == PlotKind::convergence) {
    write_convergence_csv(s, result);
    path = dir / "convergence.csv";
  } else {
    write_age_bars_csv(s, result);
    path = dir / "age_bars.csv";
  }
  write_file(path, s.str());
  return path;
}

}  // namespace ccpr
