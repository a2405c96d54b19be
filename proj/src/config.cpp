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

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "ccpr/error.hpp"
#include "ccpr/experiment.hpp"

namespace ccpr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep = ',') {
  std::vector<std::string_view> out;
  if (!s.empty() && s.front() == '[') s.remove_prefix(1);
  if (!s.empty() && s.back() == ']') s.remove_suffix(1);
  while (!s.empty()) {
    const auto at = s.find(sep);
    const auto item = trim(s.substr(0, at));
    if (!item.empty()) out.push_back(item);
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    throw ConfigError("bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  return value;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  return parse_number<std::size_t>(key, text);
}

double parse_real(std::string_view key, std::string_view text) {
  return parse_number<double>(key, text);
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

std::string policy_spec(const OrderPolicy& p) {
  switch (p.kind) {
    case OrderPolicy::Kind::static_order:
      return "static";
    case OrderPolicy::Kind::fixed_shift:
      return p.period == 0 ? "rcs1" : "rcs1:" + std::to_string(p.period);
    case OrderPolicy::Kind::adaptive:
      return "adaptive:" + std::to_string(p.age_threshold);
  }
  return "?";
}

ExperimentConfig fig3() {
  ExperimentConfig c;
  c.name = "fig3";
  c.problem = {2000, 400, 1000, 0.0};
  c.blocks = 40;
  c.workers = 40;
  c.memory = 6;
  c.train.iterations = 400;
  c.train.eta = 0.1;
  c.train.q = 0.3;
  c.train.degrees = DegreeVector({1, 2, 3});
  c.train.latency = {10.0, 0.01};
  c.train.profile.kind = StragglerProfile::Kind::persistent;
  c.train.profile.alpha_straggler = 10.0;
  c.stragglers = 15;
  c.policies = {OrderPolicy::static_order(), OrderPolicy::fixed_shift(),
                OrderPolicy::adaptive(2)};
  c.replicas = 10;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig3", "fig4", "fig5", "fig6", "table1"}; }

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c = fig3();
  if (name == "fig3") return c;
  if (name == "fig4") {
    c.name = "fig4";
    return c;
  }
  if (name == "fig5") {
    c.name = "fig5";
    c.train.profile.kind = StragglerProfile::Kind::markov;
    c.train.profile.switch_p = 0.05;
    c.train.profile.mu_fast = 10.0;
    c.train.profile.mu_slow = 2.0;
    c.policies = {OrderPolicy::static_order(), OrderPolicy::fixed_shift(),
                  OrderPolicy::adaptive(2), OrderPolicy::adaptive(3)};
    return c;
  }
  if (name == "fig6") {
    // Uncoded: each worker still holds M=6 blocks but computes only the
    // first three per iteration.
    c.name = "fig6";
    c.train.degrees = DegreeVector({1, 1, 1});
    c.train.q = 0.2;
    c.policies = {OrderPolicy::static_order(), OrderPolicy::adaptive(1)};
    return c;
  }
  if (name == "table1") {
    c.name = "table1";
    c.table_q = {0.1, 0.2, 0.3};
    c.table_a_th = 2;
    c.baseline = false;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "preset") {
    c = preset(value);
  } else if (key == "name") {
    c.name = std::string(value);
  } else if (key == "n_train") {
    c.problem.n_train = parse_count(key, value);
  } else if (key == "n_test") {
    c.problem.n_test = parse_count(key, value);
  } else if (key == "dim") {
    c.problem.dim = parse_count(key, value);
  } else if (key == "noise_std") {
    c.problem.noise_std = parse_real(key, value);
  } else if (key == "blocks") {
    c.blocks = parse_count(key, value);
  } else if (key == "workers") {
    c.workers = parse_count(key, value);
  } else if (key == "memory") {
    c.memory = parse_count(key, value);
  } else if (key == "iterations") {
    c.train.iterations = parse_count(key, value);
  } else if (key == "eta") {
    c.train.eta = parse_real(key, value);
  } else if (key == "q") {
    c.train.q = parse_real(key, value);
  } else if (key == "degrees") {
    c.train.degrees = DegreeVector::parse(value);
  } else if (key == "mu") {
    c.train.latency.mu = parse_real(key, value);
  } else if (key == "alpha") {
    c.train.latency.alpha = parse_real(key, value);
  } else if (key == "draw_mode") {
    c.train.draw_mode = parse_draw_mode(value);
  } else if (key == "profile") {
    c.train.profile.kind = parse_profile_kind(value);
  } else if (key == "stragglers") {
    c.stragglers = parse_count(key, value);
  } else if (key == "straggler_set") {
    if (value == "random") {
      c.straggler_set = ExperimentConfig::StragglerSet::random;
    } else if (value == "first") {
      c.straggler_set = ExperimentConfig::StragglerSet::first;
    } else {
      throw ConfigError("straggler_set must be random or first");
    }
  } else if (key == "alpha_straggler") {
    c.train.profile.alpha_straggler = parse_real(key, value);
  } else if (key == "markov_p") {
    c.train.profile.switch_p = parse_real(key, value);
  } else if (key == "mu_fast") {
    c.train.profile.mu_fast = parse_real(key, value);
  } else if (key == "mu_slow") {
    c.train.profile.mu_slow = parse_real(key, value);
  } else if (key == "policies") {
    c.policies.clear();
    for (auto item : split(value)) c.policies.push_back(OrderPolicy::parse(item));
  } else if (key == "replicas") {
    c.replicas = parse_count(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "jobs") {
    c.jobs = parse_count(key, value);
  } else if (key == "output_dir") {
    c.output_dir = std::string(value);
  } else if (key == "baseline") {
    c.baseline = parse_bool(key, value);
  } else if (key == "table_q") {
    c.table_q.clear();
    for (auto item : split(value)) c.table_q.push_back(parse_real(key, item));
  } else if (key == "table_a_th") {
    c.table_a_th = parse_count(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw ConfigError("config file not found: " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path.string());
  } catch (const CLI::Error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  std::map<std::string, std::string> kv;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string joined;
    for (std::size_t j = 0; j < item.inputs.size(); ++j) {
      if (j) joined += ',';
      joined += item.inputs[j];
    }
    kv[item.fullname()] = joined;
  }
  return kv;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  auto kv = read_config_file(path);
  ExperimentConfig c;
  if (auto it = kv.find("preset"); it != kv.end()) {
    apply_setting(c, "preset", it->second);
    kv.erase(it);
  }
  for (const auto& [key, value] : kv) apply_setting(c, key, value);
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.problem.n_train == 0 || c.problem.n_test == 0 || c.problem.dim == 0)
    throw ConfigError("problem dimensions must be positive");
  if (c.blocks == 0 || c.problem.dim % c.blocks != 0)
    throw ConfigError("blocks K=" + std::to_string(c.blocks) + " must divide dim=" +
                      std::to_string(c.problem.dim));
  if (c.workers == 0) throw ConfigError("need at least one worker");
  if (c.memory == 0 || c.memory > c.blocks) throw ConfigError("memory M must lie in [1, K]");
  if (c.train.degrees.total() > c.memory)
    throw ConfigError("degree vector " + c.train.degrees.to_string() + " exceeds memory M=" +
                      std::to_string(c.memory));
  if (c.stragglers > c.workers) throw ConfigError("more stragglers than workers");
  if (c.policies.empty()) throw ConfigError("no ordering policies configured");
  for (const auto& p : c.policies)
    if (p.kind == OrderPolicy::Kind::adaptive && p.age_threshold < 1)
      throw ConfigError("adaptive policy needs a_th >= 1");
  if (c.replicas == 0) throw ConfigError("replicas must be at least 1");
  for (double q : c.table_q)
    if (!(q >= 0.0 && q < 1.0)) throw ConfigError("table q values must lie in [0, 1)");
  if (c.train.profile.kind == StragglerProfile::Kind::markov) {
    const auto& p = c.train.profile;
    if (!(p.switch_p >= 0.0 && p.switch_p <= 1.0))
      throw ConfigError("markov_p must lie in [0, 1]");
    if (!(p.mu_slow > 0.0 && p.mu_fast > p.mu_slow))
      throw ConfigError("Markov rates need mu_fast > mu_slow > 0");
  }
  validate(c.train);
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "name = " << c.name << '\n'
      << "n_train = " << c.problem.n_train << '\n'
      << "n_test = " << c.problem.n_test << '\n'
      << "dim = " << c.problem.dim << '\n'
      << "noise_std = " << c.problem.noise_std << '\n'
      << "blocks = " << c.blocks << '\n'
      << "workers = " << c.workers << '\n'
      << "memory = " << c.memory << '\n'
      << "iterations = " << c.train.iterations << '\n'
      << "eta = " << c.train.eta << '\n'
      << "q = " << c.train.q << '\n'
      << "degrees = \"" << c.train.degrees.to_string() << "\"\n"
      << "mu = " << c.train.latency.mu << '\n'
      << "alpha = " << c.train.latency.alpha << '\n'
      << "draw_mode = "
      << (c.train.draw_mode == DrawMode::per_iteration ? "per_iteration" : "per_message") << '\n'
      << "profile = " << to_string(c.train.profile.kind) << '\n'
      << "stragglers = " << c.stragglers << '\n'
      << "straggler_set = "
      << (c.straggler_set == ExperimentConfig::StragglerSet::random ? "random" : "first") << '\n'
      << "alpha_straggler = " << c.train.profile.alpha_straggler << '\n'
      << "markov_p = " << c.train.profile.switch_p << '\n'
      << "mu_fast = " << c.train.profile.mu_fast << '\n'
      << "mu_slow = " << c.train.profile.mu_slow << '\n'
      << "policies = \"";
  for (std::size_t j = 0; j < c.policies.size(); ++j)
    out << (j ? "," : "") << policy_spec(c.policies[j]);
  out << "\"\n"
      << "replicas = " << c.replicas << '\n'
      << "seed = " << c.seed << '\n'
      << "baseline = " << (c.baseline ? "true" : "false") << '\n';
  if (!c.table_q.empty()) {
    out << "table_q = \"";
    for (std::size_t j = 0; j < c.table_q.size(); ++j) out << (j ? "," : "") << c.table_q[j];
    out << "\"\n"
        << "table_a_th = " << c.table_a_th << '\n';
  }
  return out.str();
}

}  // namespace ccpr
