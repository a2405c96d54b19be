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

#include "ccpr/latency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ccpr/error.hpp"

namespace ccpr {

void validate(const LatencyParams& params) {
  if (!(params.mu > 0.0)) throw ConfigError("latency rate mu must be positive");
  if (!(params.alpha >= 0.0)) throw ConfigError("latency shift alpha must be non-negative");
}

DrawMode parse_draw_mode(std::string_view text) {
  if (text == "per_iteration") return DrawMode::per_iteration;
  if (text == "per_message") return DrawMode::per_message;
  throw ConfigError("unknown latency draw mode '" + std::string(text) + "'");
}

std::vector<double> sample_completion_times(const LatencyParams& params, std::size_t messages,
                                            Rng& rng, DrawMode mode) {
  std::exponential_distribution<double> exp(params.mu);
  std::vector<double> times(messages);
  if (mode == DrawMode::per_iteration) {
    const double unit = params.alpha + exp(rng);
    for (std::size_t s = 0; s < messages; ++s) times[s] = static_cast<double>(s + 1) * unit;
  } else {
    double t = 0.0;
    for (std::size_t s = 0; s < messages; ++s) times[s] = t += params.alpha + exp(rng);
  }
  return times;
}

double completion_cdf(double t, std::size_t s, const LatencyParams& params) {
  const double per_unit = t / static_cast<double>(s);
  if (per_unit < params.alpha) return 0.0;
  return 1.0 - std::exp(-params.mu * (per_unit - params.alpha));
}

MarkovStragglerModel::MarkovStragglerModel(double p, double mu_fast, double mu_slow,
                                           std::vector<WorkerState> initial)
    : p_(p), mu_fast_(mu_fast), mu_slow_(mu_slow), states_(std::move(initial)) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("switch probability p must lie in [0, 1]");
  if (!(mu_slow > 0.0 && mu_fast > mu_slow))
    throw ConfigError("Markov rates need mu_fast > mu_slow > 0");
}

std::size_t MarkovStragglerModel::step(Rng& rng) {
  std::bernoulli_distribution flip(p_);
  std::size_t flips = 0;
  for (auto& s : states_) {
    if (flip(rng)) {
      s = s == WorkerState::fast ? WorkerState::slow : WorkerState::fast;
      ++flips;
    }
  }
  return flips;
}

LatencyParams effective_params(const StragglerProfile& profile, const LatencyParams& base,
                               std::size_t workers, WorkerId worker,
                               const MarkovStragglerModel* markov) {
  if (worker >= workers) throw ConfigError("unknown worker id " + std::to_string(worker + 1));
  switch (profile.kind) {
    case StragglerProfile::Kind::homogeneous:
      return base;
    case StragglerProfile::Kind::persistent: {
      const auto& set = profile.persistent_set;
      const bool straggler = std::find(set.begin(), set.end(), worker) != set.end();
      return straggler ? LatencyParams{base.mu, profile.alpha_straggler} : base;
    }
    case StragglerProfile::Kind::markov:
      if (markov == nullptr || markov->workers() != workers)
        throw ConfigError("Markov profile requires a chain over every worker");
      return {markov->rate(worker), base.alpha};
  }
  return base;
}

StragglerProfile::Kind parse_profile_kind(std::string_view text) {
  if (text == "homogeneous") return StragglerProfile::Kind::homogeneous;
  if (text == "persistent") return StragglerProfile::Kind::persistent;
  if (text == "markov") return StragglerProfile::Kind::markov;
  throw ConfigError("unknown straggler profile '" + std::string(text) + "'");
}

const char* to_string(StragglerProfile::Kind kind) {
  switch (kind) {
    case StragglerProfile::Kind::homogeneous:
      return "homogeneous";
    case StragglerProfile::Kind::persistent:
      return "persistent";
    case StragglerProfile::Kind::markov:
      return "markov";
  }
  return "?";
}

MarkovStragglerModel make_chain(const StragglerProfile& profile, std::size_t workers) {
  std::vector<WorkerState> states(workers, WorkerState::fast);
  for (WorkerId i : profile.initial_slow) {
    if (i >= workers) throw ConfigError("initial slow worker id out of range");
    states[i] = WorkerState::slow;
  }
  return MarkovStragglerModel(profile.switch_p, profile.mu_fast, profile.mu_slow,
                              std::move(states));
}

std::vector<WorkerId> draw_worker_subset(std::size_t workers, std::size_t count,
                                         std::uint64_t seed) {
  if (count > workers) throw ConfigError("cannot pick more stragglers than workers");
  std::vector<WorkerId> ids(workers);
  std::iota(ids.begin(), ids.end(), WorkerId{0});
  Rng rng(seed);
  for (std::size_t j = 0; j < count; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, workers - 1);
    std::swap(ids[j], ids[pick(rng)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace ccpr
