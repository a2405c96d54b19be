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

#include "ccpr/codec.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "ccpr/error.hpp"
#include "ccpr/random.hpp"

namespace ccpr {

namespace {

std::size_t parse_count(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    throw ConfigError("bad " + std::string(what) + ": '" + std::string(text) + "'");
  return value;
}

}  // namespace

AssignmentMatrix::AssignmentMatrix(std::size_t block_count, std::size_t workers,
                                   std::vector<std::size_t> row_shifts)
    : blocks_(block_count), workers_(workers), shifts_(std::move(row_shifts)) {
  if (blocks_ == 0 || workers_ == 0 || shifts_.empty())
    throw ConfigError("assignment matrix needs blocks, workers and at least one row");
  if (shifts_.size() > blocks_) throw ConfigError("more rows than blocks");
  std::vector<bool> seen(blocks_, false);
  for (std::size_t s : shifts_) {
    if (s >= blocks_) throw ConfigError("row shift out of range");
    if (seen[s]) throw ConfigError("row shifts must be pairwise distinct");
    seen[s] = true;
  }
}

std::vector<BlockId> AssignmentMatrix::column(WorkerId worker) const {
  std::vector<BlockId> col(rows());
  for (std::size_t r = 0; r < rows(); ++r) col[r] = at(r, worker);
  return col;
}

void AssignmentMatrix::write_csv(std::ostream& out) const {
  for (std::size_t r = 0; r < rows(); ++r) {
    for (WorkerId i = 0; i < workers_; ++i) {
      if (i) out << ',';
      out << at(r, i) + 1;
    }
    out << '\n';
  }
}

DegreeVector::DegreeVector(std::vector<std::size_t> degrees) : degrees_(std::move(degrees)) {
  if (degrees_.empty()) throw ConfigError("degree vector is empty");
  for (std::size_t d : degrees_) {
    if (d == 0) throw ConfigError("codeword degrees must be positive");
    total_ += d;
  }
}

DegreeVector DegreeVector::parse(std::string_view text) {
  if (!text.empty() && text.front() == '[') text.remove_prefix(1);
  if (!text.empty() && text.back() == ']') text.remove_suffix(1);
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_count(text.substr(0, comma), "degree"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return DegreeVector(std::move(out));
}

std::string DegreeVector::to_string() const {
  std::string s = "[";
  for (std::size_t l = 0; l < degrees_.size(); ++l) {
    if (l) s += ',';
    s += std::to_string(degrees_[l]);
  }
  return s + "]";
}

OrderPolicy OrderPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "static" || head == "rcs") {
    if (!arg.empty()) throw ConfigError("static policy takes no argument");
    return static_order();
  }
  if (head == "rcs1" || head == "fixed_shift")
    return fixed_shift(arg.empty() ? 0 : parse_count(arg, "shift period"));
  if (head == "adaptive") {
    if (arg.empty()) throw ConfigError("adaptive policy needs an age threshold: adaptive:<a_th>");
    const std::size_t a_th = parse_count(arg, "age threshold");
    if (a_th < 1) throw ConfigError("age threshold must be at least 1");
    return adaptive(a_th);
  }
  throw ConfigError("unknown ordering policy '" + std::string(text) + "'");
}

std::string OrderPolicy::label() const {
  switch (kind) {
    case Kind::static_order:
      return "RCS";
    case Kind::fixed_shift:
      return period == 0 ? "RCS-1" : "RCS-1(period=" + std::to_string(period) + ")";
    case Kind::adaptive:
      return "RCS-adaptive(a_th=" + std::to_string(age_threshold) + ")";
  }
  return "?";
}

AssignmentMatrix build_rcs(std::size_t block_count, std::size_t workers, std::size_t memory,
                           std::uint64_t seed) {
  if (block_count == 0 || workers == 0 || memory == 0)
    throw ConfigError("build_rcs: counts must be positive");
  if (memory > block_count)
    throw ConfigError("memory M=" + std::to_string(memory) + " exceeds block count K=" +
                      std::to_string(block_count));
  std::vector<std::size_t> all(block_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `memory` slots are a uniform draw
  // without replacement, in draw order.
  Rng rng(seed);
  for (std::size_t j = 0; j < memory; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, block_count - 1);
    std::swap(all[j], all[pick(rng)]);
  }
  all.resize(memory);
  return AssignmentMatrix(block_count, workers, std::move(all));
}

AssignmentMatrix apply_order(const AssignmentMatrix& a, std::size_t shift) {
  const std::size_t rows = a.rows();
  if (shift >= rows)
    throw ConfigError("shift " + std::to_string(shift) + " must be below M=" +
                      std::to_string(rows));
  std::vector<std::size_t> rotated(rows);
  for (std::size_t r = 0; r < rows; ++r) rotated[r] = a.row_shifts()[(r + shift) % rows];
  return AssignmentMatrix(a.block_count(), a.workers(), std::move(rotated));
}

AssignmentMatrix apply_order(const AssignmentMatrix& a, const OrderPolicy& policy,
                             std::size_t shift) {
  if (policy.kind == OrderPolicy::Kind::static_order) return a;
  return apply_order(a, shift);
}

std::size_t fixed_shift_at(const OrderPolicy& policy, std::size_t rows, std::size_t t) {
  const std::size_t period = policy.period == 0 ? rows : policy.period;
  return (t % period) % rows;
}

ShiftChoice select_adaptive_shift(const AssignmentMatrix& a, std::span<const std::size_t> ages,
                                  std::size_t age_threshold,
                                  std::span<const WorkerId> responsive) {
  if (ages.size() != a.block_count()) throw DimensionError("age vector length differs from K");
  ShiftChoice best;
  for (std::size_t shift = 0; shift < a.rows(); ++shift) {
    std::size_t count = 0;
    for (WorkerId i : responsive) {
      if (i >= a.workers()) throw ConfigError("responsive worker id out of range");
      if (ages[a.at(shift, i)] > age_threshold) ++count;
    }
    if (count > best.aged_count) best = {shift, count};
  }
  return best;
}

std::vector<CodewordSpec> encode(const AssignmentMatrix& a, const DegreeVector& m) {
  if (m.total() > a.rows())
    throw ConfigError("degree vector " + m.to_string() + " needs " + std::to_string(m.total()) +
                      " rows but the assignment has M=" + std::to_string(a.rows()));
  std::vector<CodewordSpec> specs;
  specs.reserve(a.workers() * m.size());
  for (WorkerId i = 0; i < a.workers(); ++i) {
    std::size_t row = 0;
    for (std::size_t l = 0; l < m.size(); ++l) {
      CodewordSpec spec{i, l, {}};
      spec.members.reserve(m[l]);
      for (std::size_t j = 0; j < m[l]; ++j) spec.members.push_back(a.at(row++, i));
      specs.push_back(std::move(spec));
    }
  }
  return specs;
}

}  // namespace ccpr
