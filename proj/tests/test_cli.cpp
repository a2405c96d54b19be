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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kTiny =
    " --replicas 1 --jobs 1 --set iterations=5 --set dim=40 --set n_train=80"
    " --set n_test=20";

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CCPR_SIM_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("preset runs write results and exit 0") {
  ccpr::test::TempDir dir("cli_ok");
  const auto out = dir.path() / "fig3";
  CHECK(run("preset fig3" + kTiny + " --out " + out.string(), dir.path() / "log") == 0);
  CHECK(fs::exists(out / "convergence.csv"));
  CHECK(fs::exists(out / "manifest.csv"));
  CHECK(fs::exists(out / "raw" / "rcs1" / "replica_000" / "metrics.csv"));
}

TEST_CASE("output directory defaults to CCPR_OUTPUT_DIR/<name>") {
  ccpr::test::TempDir dir("cli_env");
  const std::string env = "CCPR_OUTPUT_DIR=" + dir.path().string() + " ";
  const std::string cmd = env + CCPR_SIM_PATH + " preset fig6" + kTiny + " > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir.path() / "fig6" / "age_bars.csv"));
}

TEST_CASE("run --config") {
  ccpr::test::TempDir dir("cli_cfg");
  const auto cfg = dir.path() / "exp.ini";
  std::ofstream(cfg) << "preset = fig3\nname = mine\niterations = 5\ndim = 40\nn_train = 80\n"
                        "n_test = 20\nreplicas = 1\npolicies = static,adaptive:2\n";
  const auto out = dir.path() / "out";
  CHECK(run("run --config " + cfg.string() + " --out " + out.string(), dir.path() / "log") == 0);
  CHECK(fs::exists(out / "raw" / "adaptive_a2" / "replica_000" / "ages.csv"));
  CHECK(run("run --config " + (dir.path() / "missing.ini").string(), dir.path() / "log") == 2);
}

TEST_CASE("table1 subcommand") {
  ccpr::test::TempDir dir("cli_t1");
  const auto out = dir.path() / "t1";
  CHECK(run("table1 --a-th 2 --q 0.1,0.3" + kTiny + " --out " + out.string(),
            dir.path() / "log") == 0);
  CHECK(fs::exists(out / "table1.csv"));
}

TEST_CASE("configuration errors exit 2") {
  ccpr::test::TempDir dir("cli_bad");
  const auto log = dir.path() / "log";
  CHECK(run("preset fig9", log) == 2);
  CHECK(run("preset fig3 --set q=1.5", log) == 2);
  CHECK(run("preset fig3 --set nonsense=1", log) == 2);
  CHECK(run("preset fig3 --set degrees=[1,2,3,4]", log) == 2);
  CHECK(run("--no-such-flag", log) == 2);
}

TEST_CASE("runtime errors exit 3") {
  ccpr::test::TempDir dir("cli_io");
  const auto blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  CHECK(run("preset fig3" + kTiny + " --out " + (blocker / "sub").string(), dir.path() / "log") ==
        3);
}
