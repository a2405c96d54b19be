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

#include "ccpr/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccpr/error.hpp"

namespace ccpr {

std::size_t recovery_target(std::size_t block_count, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw ConfigError("tolerance q must lie in [0, 1)");
  // The epsilon absorbs representation error, e.g. (1 - 0.3) * 40 = 27.999...
  const double need = (1.0 - q) * static_cast<double>(block_count);
  return static_cast<std::size_t>(std::ceil(need - 1e-9));
}

std::size_t Recovery::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

PeelingDecoder::PeelingDecoder(std::size_t block_count, std::size_t block_rows,
                               std::size_t target)
    : block_rows_(block_rows),
      target_(target),
      recovered_(block_count, 0),
      values_(block_count),
      touching_(block_count) {
  if (block_count == 0) throw ConfigError("decoder needs at least one block");
  if (target > block_count) throw ConfigError("recovery target exceeds block count");
}

std::size_t PeelingDecoder::pending_count() const {
  return static_cast<std::size_t>(
      std::count_if(equations_.begin(), equations_.end(), [](const Equation& e) { return e.live; }));
}

std::vector<BlockId> PeelingDecoder::ingest(const CodedResult& result) {
  auto resolved = absorb(result.spec.members, result.value);
  trace_.push_back({result.spec, result.completion_time, resolved});
  return resolved;
}

std::vector<BlockId> PeelingDecoder::ingest(std::span<const BlockId> members,
                                            const Vector& value) {
  auto resolved = absorb(members, value);
  trace_.push_back({CodewordSpec{0, 0, {members.begin(), members.end()}}, 0.0, resolved});
  return resolved;
}

std::vector<BlockId> PeelingDecoder::absorb(std::span<const BlockId> members,
                                            const Vector& value) {
  if (members.empty()) throw ProtocolError("coded result has no members");
  if (static_cast<std::size_t>(value.size()) != block_rows_)
    throw ProtocolError("coded result has length " + std::to_string(value.size()) +
                        ", expected " + std::to_string(block_rows_));
  for (BlockId k : members)
    if (k >= recovered_.size())
      throw ProtocolError("member index " + std::to_string(k + 1) + " outside [1, " +
                          std::to_string(recovered_.size()) + "]");
  ++ingested_;

  Equation eq;
  eq.residual = value;
  for (BlockId k : members) {
    if (recovered_[k]) {
      eq.residual -= values_[k];
    } else {
      eq.unresolved.push_back(k);
    }
  }

  std::vector<BlockId> ripple;
  if (eq.unresolved.empty()) return ripple;  // carries no new information
  if (eq.unresolved.size() == 1) {
    recover(eq.unresolved.front(), std::move(eq.residual), ripple);
  } else {
    const std::size_t id = equations_.size();
    for (BlockId k : eq.unresolved) touching_[k].push_back(id);
    equations_.push_back(std::move(eq));
  }

  // Cascade: every recovered block is substituted into the pending
  // equations that still list it.
  for (std::size_t next = 0; next < ripple.size(); ++next) {
    const BlockId k = ripple[next];
    for (std::size_t id : touching_[k]) {
      Equation& e = equations_[id];
      if (!e.live) continue;
      const auto it = std::find(e.unresolved.begin(), e.unresolved.end(), k);
      if (it == e.unresolved.end()) continue;
      e.unresolved.erase(it);
      e.residual -= values_[k];
      if (e.unresolved.size() == 1) {
        e.live = false;
        const BlockId last = e.unresolved.front();
        // If `last` is already recovered its substitution is still queued
        // and this equation is redundant.
        if (!recovered_[last]) recover(last, std::move(e.residual), ripple);
      } else if (e.unresolved.empty()) {
        e.live = false;
      }
    }
    touching_[k].clear();
  }
  return ripple;
}

void PeelingDecoder::recover(BlockId k, Vector value, std::vector<BlockId>& ripple) {
  recovered_[k] = 1;
  values_[k] = std::move(value);
  ++recovered_count_;
  order_.push_back(k);
  ripple.push_back(k);
}

Recovery PeelingDecoder::finalize() const { return Recovery{recovered_, values_}; }

void PeelingDecoder::write_trace(std::ostream& out) const {
  out << "# blocks=" << recovered_.size() << " target=" << target_
      << " recovered=" << recovered_count_ << '\n';
  std::size_t seq = 0;
  for (const auto& line : trace_) {
    out << "ingest " << seq++ << " worker=" << line.spec.worker + 1
        << " order=" << line.spec.order + 1 << " time=" << line.time << " members=";
    for (std::size_t j = 0; j < line.spec.members.size(); ++j)
      out << (j ? "," : "") << line.spec.members[j] + 1;
    out << " resolved=";
    if (line.resolved.empty()) out << '-';
    for (std::size_t j = 0; j < line.resolved.size(); ++j)
      out << (j ? "," : "") << line.resolved[j] + 1;
    out << '\n';
  }
  out << "order=";
  for (std::size_t j = 0; j < order_.size(); ++j) out << (j ? "," : "") << order_[j] + 1;
  out << '\n';
}

bool is_complete(const PeelingDecoder& state, double q) {
  return state.recovered_count() >= recovery_target(state.block_count(), q);
}

}  // namespace ccpr
