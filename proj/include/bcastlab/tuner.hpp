// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "bcastlab/core.hpp"

namespace bcastlab {

enum class CostOracle { Analytical, Simulated };

std::string_view oracle_name(CostOracle oracle);
std::optional<CostOracle> oracle_from_name(std::string_view name);

struct TuningEntry {
  int n{};
  std::uint64_t msg_min_bytes{};  // inclusive
  std::uint64_t msg_max_bytes{};  // exclusive
  AlgorithmConfig config{};
  double predicted_cost_s{};

  bool operator==(const TuningEntry&) const = default;
};

/// Per (rank count, message-size range) winner table. Entries are sorted by
/// (n, msg_min_bytes); ranges of one n are disjoint and cover the swept span.
struct TuningTable {
  CostOracle oracle{CostOracle::Analytical};
  std::vector<TuningEntry> entries;

  bool operator==(const TuningTable&) const = default;
};

/// Cost of one candidate under the chosen oracle: the closed-form model or a
/// simulator run of the generated schedule (root 0).
double evaluate_cost(const AlgorithmConfig& config, int n,
                     std::uint64_t message_bytes, const NetworkParams& params,
                     CostOracle oracle);

/// True when `lhs` beats `rhs`: lower cost, then earlier algorithm in the
/// enum order, then smaller chunk, then smaller radix.
bool beats(double lhs_cost, const AlgorithmConfig& lhs, double rhs_cost,
           const AlgorithmConfig& rhs);

/// Expands the candidate templates for one message size: pipelined-chain
/// templates fan out over the chunk candidates, clamped to the message size
/// (an oversized chunk degenerates to the plain chain).
std::vector<AlgorithmConfig> expand_candidates(
    const std::vector<AlgorithmConfig>& candidates,
    const std::vector<std::uint64_t>& chunk_candidates,
    std::uint64_t message_bytes);

/// Brute-force winner selection over every (n, swept size). The winner at a
/// swept size covers the surrounding size range, with range boundaries at the
/// geometric mean of adjacent swept sizes so that each stored winner sits at
/// its range's geometric midpoint; the last range extends to twice the top
/// swept size. Adjacent ranges with the same winner merge.
TuningTable tune(const std::vector<int>& n_list,
                 const std::vector<std::uint64_t>& msg_sizes,
                 const std::vector<AlgorithmConfig>& candidates,
                 const std::vector<std::uint64_t>& chunk_candidates,
                 const NetworkParams& params, CostOracle oracle);

/// Table lookup: exact n, else the nearest smaller tuned n; message sizes
/// below the first range clamp to it, at or beyond the last to the last.
/// Throws std::out_of_range on an empty table or n below every tuned n.
AlgorithmConfig select(const TuningTable& table, int n,
                       std::uint64_t message_bytes);

class TableParseError : public std::runtime_error {
 public:
  TableParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// CSV with header n,msg_min_bytes,msg_max_bytes,algorithm,radix,chunk_bytes,
// predicted_cost_s; unused parameters are written as 0 and the oracle rides
// in a leading `# oracle: ...` comment. Costs round-trip exactly.
void save_table(const TuningTable& table, std::ostream& out);
void save_table(const TuningTable& table, const std::filesystem::path& path);
TuningTable load_table(std::istream& in);
TuningTable load_table(const std::filesystem::path& path);

}  // namespace bcastlab
