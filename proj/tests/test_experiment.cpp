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

#include <cmath>
#include <fstream>
#include <sstream>

#include "ccpr/error.hpp"
#include "ccpr/experiment.hpp"
#include "ccpr/io.hpp"
#include "doctest.h"
#include "support/temp_dir.hpp"

using namespace ccpr;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(const fs::path& out = {}) {
  ExperimentConfig c = preset("fig3");
  c.name = "small";
  c.problem = ProblemParams{80, 20, 16, 0.0};
  c.blocks = 8;
  c.workers = 8;
  c.memory = 3;
  c.stragglers = 2;
  c.train.degrees = DegreeVector({1, 2});
  c.train.iterations = 25;
  c.replicas = 3;
  c.jobs = 2;
  c.output_dir = out;
  return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("presets resolve with the documented settings") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset(name)));
  const auto f3 = preset("fig3");
  CHECK(f3.blocks == 40);
  CHECK(f3.problem.dim == 1000);
  CHECK(f3.memory == 6);
  CHECK(f3.train.degrees.values() == std::vector<std::size_t>{1, 2, 3});
  CHECK(f3.train.iterations == 400);
  CHECK(f3.train.eta == 0.1);
  CHECK(f3.train.q == doctest::Approx(0.3));
  CHECK(f3.stragglers == 15);
  CHECK(f3.train.profile.kind == StragglerProfile::Kind::persistent);
  CHECK(f3.train.profile.alpha_straggler == 10.0);
  CHECK(f3.train.latency.mu == 10.0);
  CHECK(f3.train.latency.alpha == 0.01);
  REQUIRE(f3.policies.size() == 3);
  CHECK(f3.policies[2].age_threshold == 2);

  const auto f5 = preset("fig5");
  CHECK(f5.train.profile.kind == StragglerProfile::Kind::markov);
  CHECK(f5.train.profile.switch_p == 0.05);
  CHECK(f5.train.profile.mu_slow == 2.0);
  CHECK(f5.policies.size() == 4);

  const auto f6 = preset("fig6");
  CHECK(f6.train.degrees.values() == std::vector<std::size_t>{1, 1, 1});
  CHECK(f6.train.q == doctest::Approx(0.2));
  CHECK(f6.policies.back().age_threshold == 1);

  CHECK(preset("table1").table_q == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_THROWS_AS(preset("fig9"), ConfigError);
}

TEST_CASE("config files and overrides") {
  test::TempDir dir("cfg");
  const auto file = dir.path() / "run.ini";
  std::ofstream(file) << "# comment\niterations = 50\npreset = fig6\nq = 0.25\n"
                         "policies = static,rcs1,adaptive:3\n";
  const auto c = load_config(file);
  CHECK(c.name == "fig6");
  CHECK(c.train.iterations == 50);
  CHECK(c.train.q == doctest::Approx(0.25));
  REQUIRE(c.policies.size() == 3);
  CHECK(c.policies[2].age_threshold == 3);

  // describe() round-trips through the loader.
  const auto again = dir.path() / "again.ini";
  std::ofstream(again) << describe(c);
  CHECK(describe(load_config(again)) == describe(c));

  ExperimentConfig e = preset("fig3");
  CHECK_THROWS_AS(apply_setting(e, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(e, "q", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(e, "degrees", "[0,1]"), ConfigError);
  apply_setting(e, "degrees", "[1,2,3,4]");
  CHECK_THROWS_AS(validate(e), ConfigError);  // sum(m) > M
  CHECK_THROWS_AS(load_config(dir.path() / "missing.ini"), ConfigError);
}

TEST_CASE("aggregates agree with the raw files") {
  test::TempDir dir("agg");
  const auto r = run_experiment(small(dir.path()));
  REQUIRE(r.runs.size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto slug = policy_slug(r.policies[p]);
    std::vector<double> final_loss, age1;
    for (std::size_t rep = 0; rep < 3; ++rep) {
      char name[32];
      std::snprintf(name, sizeof name, "replica_%03zu", rep);
      const auto run = dir.path() / "raw" / slug / name;
      const auto m = read_csv(run / "metrics.csv");
      REQUIRE(m.size() == 26);
      final_loss.push_back(std::stod(m.back()[5]));
      const auto s = read_csv(run / "summary.csv");
      age1.push_back(std::stod(s[1][1]));
    }
    const double mean = (final_loss[0] + final_loss[1] + final_loss[2]) / 3.0;
    CHECK(std::abs(mean - r.test_loss_mean[p].back()) <= 1e-12 * std::max(1.0, mean));
    const double amean = (age1[0] + age1[1] + age1[2]) / 3.0;
    CHECK(std::abs(amean - r.average_age_mean[p][0]) <= 1e-12);
  }
  CHECK(fs::exists(dir.path() / "config.txt"));
  CHECK(fs::exists(dir.path() / "objectives.csv"));
  CHECK(fs::exists(dir.path() / "raw" / "instances" / "replica_000" / "assignment.csv"));
}

TEST_CASE("reruns are byte-identical and the manifest checks out") {
  test::TempDir a("det_a"), b("det_b");
  auto ca = small(a.path());
  auto cb = small(b.path());
  cb.jobs = 1;
  run_experiment(ca);
  run_experiment(cb);
  const auto ma = read_csv(a.path() / "manifest.csv");
  CHECK(ma == read_csv(b.path() / "manifest.csv"));
  REQUIRE(ma.size() > 1);
  for (std::size_t i = 1; i < ma.size(); ++i) {
    const auto file = ma[i][0];
    CHECK(read_file(a.path() / file) == read_file(b.path() / file));
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(file_checksum(a.path() / file)));
    CHECK(ma[i][1] == hex);
  }
}

TEST_CASE("policies of one replica share the instance") {
  const auto s1 = replica_seeds(1, 0);
  const auto s2 = replica_seeds(1, 1);
  CHECK(s1.problem != s2.problem);
  CHECK(s1.code != s1.problem);
  CHECK(latency_seed(1, 0, 0) != latency_seed(1, 1, 0));
  CHECK(latency_seed(1, 0, 0) != latency_seed(1, 0, 1));
}

TEST_CASE("plot data shapes") {
  test::TempDir dir("plot");
  auto c = small();
  c.train.iterations = 400;
  c.replicas = 2;
  const auto r = run_experiment(c);
  const auto conv = read_csv(emit_plotdata(r, PlotKind::convergence, dir.path()));
  REQUIRE(conv.size() == 401);
  CHECK(conv[0].size() == 1 + 2 * 3 + 2);
  for (std::size_t i = 1; i < conv.size(); ++i) CHECK(std::stoul(conv[i][0]) == i);
  const auto bars = read_csv(emit_plotdata(r, PlotKind::age_bars, dir.path()));
  CHECK(bars.size() == 1 + 8);
  CHECK(bars[0].size() == 1 + 3);

  std::ostringstream empty;
  write_convergence_csv(empty, SweepResult{});
  CHECK(empty.str() == "iteration\n");
}

TEST_CASE("table1 grid") {
  auto c = small();
  c.policies = {OrderPolicy::static_order(), OrderPolicy::fixed_shift(),
                OrderPolicy::adaptive(2)};
  const auto g = table1_grid(c, {0.1, 0.3}, 2, 2);
  REQUIRE(g.mean.size() == 2);
  REQUIRE(g.mean[0].size() == 3);
  for (const auto& row : g.mean)
    for (double v : row) CHECK((v >= 0.0 && v <= 1.0));
  // No age can exceed T, so a threshold of T zeroes every objective.
  const auto z = table1_grid(c, {0.3}, c.train.iterations, 2);
  for (double v : z.mean[0]) CHECK(v == 0.0);
  CHECK_THROWS_AS(table1_grid(c, {}, 2, 2), ConfigError);
}
