// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcastlab/models.hpp"
#include "bcastlab/tuner.hpp"

using namespace bcastlab;

namespace {

NetworkParams baseline() {
  return NetworkParams{1e-6, 1e9, 1e10};
}

std::vector<std::uint64_t> power_of_two_sizes(std::uint64_t lo,
                                              std::uint64_t hi) {
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t s = lo; s <= hi; s *= 2) sizes.push_back(s);
  return sizes;
}

std::vector<AlgorithmConfig> default_candidates() {
  return {AlgorithmConfig{Algorithm::Knomial, 2, 0},
          AlgorithmConfig{Algorithm::ChainPipelined, 0, 0}};
}

std::vector<std::uint64_t> default_chunks() {
  return power_of_two_sizes(8192, 4194304);
}

// Plain reimplementation of the winner rule, kept independent of tune():
// walk every expanded candidate and keep the cheapest, preferring the
// earlier algorithm, then the smaller chunk, on exact ties.
AlgorithmConfig exhaustive_winner(int n, std::uint64_t message,
                                  const std::vector<AlgorithmConfig>& cands,
                                  const std::vector<std::uint64_t>& chunks,
                                  const NetworkParams& p) {
  AlgorithmConfig best{};
  double best_cost = 0.0;
  bool have = false;
  for (const AlgorithmConfig& c : cands) {
    std::vector<AlgorithmConfig> expanded;
    if (c.algorithm == Algorithm::ChainPipelined) {
      for (std::uint64_t chunk : chunks) {
        AlgorithmConfig e = c;
        e.chunk_bytes = std::min(chunk, std::max<std::uint64_t>(message, 1));
        expanded.push_back(e);
      }
    } else {
      expanded.push_back(c);
    }
    for (const AlgorithmConfig& e : expanded) {
      const double cost = cost_for(e, n, message, p).total_s;
      const bool wins =
          !have || cost < best_cost ||
          (cost == best_cost &&
           (e.algorithm < best.algorithm ||
            (e.algorithm == best.algorithm &&
             e.chunk_bytes < best.chunk_bytes)));
      if (wins) {
        best = e;
        best_cost = cost;
        have = true;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("pipelined chain wins the large-message regime") {
  const auto p = baseline();
  const auto table = tune({4}, power_of_two_sizes(1024, 4194304),
                          default_candidates(), default_chunks(), p,
                          CostOracle::Analytical);
  const AlgorithmConfig at_1mb = select(table, 4, 1000000);
  CHECK(at_1mb.algorithm == Algorithm::ChainPipelined);
  CHECK(cost_for(at_1mb, 4, 1000000, p).total_s <
        cost_knomial(4, 2, 1000000, p).total_s);
  CHECK(at_1mb == exhaustive_winner(4, 1048576, default_candidates(),
                                    default_chunks(), p));
}

TEST_CASE("binomial tree wins the small-message regime") {
  const auto table = tune({16}, power_of_two_sizes(1024, 4194304),
                          default_candidates(), default_chunks(), baseline(),
                          CostOracle::Analytical);
  const AlgorithmConfig small = select(table, 16, 1024);
  CHECK(small.algorithm == Algorithm::Knomial);
  CHECK(small.radix_k == 2);
  // At 1 KB the tree costs about 8.1 us against the chain's 30.4 us.
  CHECK(cost_for(small, 16, 1024, baseline()).total_s < 1e-5);
}

TEST_CASE("a single candidate covers every range") {
  const auto table =
      tune({4, 8}, power_of_two_sizes(1024, 1048576),
           {AlgorithmConfig{Algorithm::Chain, 0, 0}}, {}, baseline(),
           CostOracle::Analytical);
  REQUIRE(table.entries.size() == 2);
  for (const auto& e : table.entries) {
    CHECK(e.config.algorithm == Algorithm::Chain);
    CHECK(e.msg_min_bytes == 1024);
    CHECK(e.msg_max_bytes == 2 * 1048576);
  }
}

TEST_CASE("each rank count has a single knomial-to-pipelined crossover") {
  const auto p = baseline();
  const auto sizes = power_of_two_sizes(1024, 4194304);
  const auto table = tune({4, 8, 16}, sizes, default_candidates(),
                          default_chunks(), p, CostOracle::Analytical);
  for (int n : {4, 8, 16}) {
    bool seen_pipelined = false;
    std::uint64_t threshold = 0;
    for (std::uint64_t size : sizes) {
      const AlgorithmConfig chosen = select(table, n, size);
      CHECK(chosen == exhaustive_winner(n, size, default_candidates(),
                                        default_chunks(), p));
      if (chosen.algorithm == Algorithm::ChainPipelined) {
        if (!seen_pipelined) threshold = size;
        seen_pipelined = true;
      } else {
        CHECK(chosen.algorithm == Algorithm::Knomial);
        CHECK(!seen_pipelined);  // no flip back below the threshold
      }
    }
    CHECK(seen_pipelined);
    CHECK(threshold > sizes.front());
    CAPTURE(n);
    CAPTURE(threshold);
  }
}

TEST_CASE("stored winners hold at each range's geometric midpoint") {
  const auto p = baseline();
  const auto table = tune({4, 8, 16}, power_of_two_sizes(1024, 4194304),
                          default_candidates(), default_chunks(), p,
                          CostOracle::Analytical);
  for (const TuningEntry& e : table.entries) {
    const auto midpoint = static_cast<std::uint64_t>(std::llround(
        std::sqrt(static_cast<double>(e.msg_min_bytes) *
                  static_cast<double>(e.msg_max_bytes))));
    const AlgorithmConfig winner = exhaustive_winner(
        e.n, midpoint, default_candidates(), default_chunks(), p);
    CHECK(winner == e.config);
    CHECK(e.predicted_cost_s ==
          cost_for(e.config, e.n, midpoint, p).total_s);
  }
}

TEST_CASE("ties go to the earlier algorithm and the smaller chunk") {
  // Two identical knomial templates: the first-listed one must win, and
  // duplicated chunk candidates must collapse to one entry.
  const auto table = tune(
      {8}, {std::uint64_t{1024}},
      {AlgorithmConfig{Algorithm::Knomial, 2, 0},
       AlgorithmConfig{Algorithm::KnomialStaged, 2, 0}},
      {}, NetworkParams{1e-6, 1e9, 1e30}, CostOracle::Analytical);
  REQUIRE(table.entries.size() == 1);
  // Equal totals at astronomically fast staging still prefer the plain tree.
  CHECK(table.entries[0].config.algorithm == Algorithm::Knomial);

  const auto chunk_tie =
      tune({4}, {std::uint64_t{1024}},
           {AlgorithmConfig{Algorithm::ChainPipelined, 0, 0}},
           {8192, 16384, 32768}, baseline(), CostOracle::Analytical);
  REQUIRE(chunk_tie.entries.size() == 1);
  // Every chunk clamps to the 1 KB message; the smallest clamp survives.
  CHECK(chunk_tie.entries[0].config.chunk_bytes == 1024);
}

TEST_CASE("select clamps and falls back to the nearest smaller rank count") {
  const auto table = tune({4, 8}, power_of_two_sizes(1024, 1048576),
                          default_candidates(), default_chunks(), baseline(),
                          CostOracle::Analytical);
  CHECK(select(table, 4, 0) == select(table, 4, 1024));
  CHECK(select(table, 4, std::uint64_t{1} << 40) ==
        select(table, 4, 2 * 1048576 - 1));
  CHECK(select(table, 5, 4096) == select(table, 4, 4096));
  CHECK(select(table, 8, 4096) != select(table, 4, 1 << 30));
  CHECK(select(table, 100, 4096) == select(table, 8, 4096));
  CHECK_THROWS_AS(select(table, 3, 4096), std::out_of_range);
  CHECK_THROWS_AS(select(TuningTable{}, 4, 4096), std::out_of_range);
}

TEST_CASE("tables survive a save/load round trip") {
  const auto table = tune({4, 8, 16}, power_of_two_sizes(1024, 4194304),
                          default_candidates(), default_chunks(), baseline(),
                          CostOracle::Analytical);
  std::stringstream io;
  save_table(table, io);
  CHECK(load_table(io) == table);

  // Simulated-oracle tables carry their oracle through the round trip.
  auto simulated = table;
  simulated.oracle = CostOracle::Simulated;
  std::stringstream io2;
  save_table(simulated, io2);
  CHECK(load_table(io2).oracle == CostOracle::Simulated);
}

TEST_CASE("simulated oracle agrees with the analytical one at desk scale") {
  const auto sizes = power_of_two_sizes(8192, 262144);
  const auto analytical =
      tune({4, 8}, sizes, default_candidates(), default_chunks(), baseline(),
           CostOracle::Analytical);
  const auto simulated =
      tune({4, 8}, sizes, default_candidates(), default_chunks(), baseline(),
           CostOracle::Simulated);
  CHECK(simulated.oracle == CostOracle::Simulated);
  for (int n : {4, 8}) {
    for (std::uint64_t size : sizes) {
      CHECK(select(analytical, n, size).algorithm ==
            select(simulated, n, size).algorithm);
    }
  }
}

TEST_CASE("malformed tables are rejected with line numbers") {
  const std::string header =
      "n,msg_min_bytes,msg_max_bytes,algorithm,radix,chunk_bytes,"
      "predicted_cost_s\n";

  {
    std::istringstream in(header);
    CHECK_THROWS_WITH_AS(load_table(in), "line 1: table has no entries",
                         TableParseError);
  }
  {
    std::istringstream in(header + "4,1024,2048,knomial,2,0\n");
    try {
      load_table(in);
      FAIL("expected a parse error");
    } catch (const TableParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  {
    std::istringstream in(header + "4,1024,2048,ring,0,0,1e-5\n");
    CHECK_THROWS_AS(load_table(in), TableParseError);
  }
  {
    std::istringstream in(header +
                          "4,1024,4096,knomial,2,0,1e-5\n"
                          "4,2048,8192,chain,0,0,2e-5\n");
    CHECK_THROWS_WITH_AS(load_table(in),
                         "line 3: overlapping or unsorted ranges for n=4",
                         TableParseError);
  }
  {
    std::istringstream in("garbage\n");
    CHECK_THROWS_AS(load_table(in), TableParseError);
  }
}

TEST_CASE("unused parameters are written as zero") {
  const auto table = tune({4}, power_of_two_sizes(1024, 4194304),
                          default_candidates(), default_chunks(), baseline(),
                          CostOracle::Analytical);
  std::stringstream io;
  save_table(table, io);
  const std::string text = io.str();
  CHECK(text.rfind("# oracle: analytical\n", 0) == 0);
  std::istringstream lines(text);
  std::string line;
  bool saw_knomial = false;
  bool saw_pipelined = false;
  while (std::getline(lines, line)) {
    if (line.find(",knomial,2,0,") != std::string::npos) saw_knomial = true;
    if (line.find(",chain_pipelined,0,") != std::string::npos) {
      saw_pipelined = true;
    }
  }
  CHECK(saw_knomial);
  CHECK(saw_pipelined);
}

TEST_CASE("tune validates its inputs") {
  const auto p = baseline();
  CHECK_THROWS_AS(tune({}, {1024}, default_candidates(), default_chunks(), p,
                       CostOracle::Analytical),
                  std::invalid_argument);
  CHECK_THROWS_AS(tune({4}, {}, default_candidates(), default_chunks(), p,
                       CostOracle::Analytical),
                  std::invalid_argument);
  CHECK_THROWS_AS(tune({4}, {1024}, {}, default_chunks(), p,
                       CostOracle::Analytical),
                  std::invalid_argument);
  CHECK_THROWS_AS(tune({4}, {2048, 1024}, default_candidates(),
                       default_chunks(), p, CostOracle::Analytical),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      tune({4}, {std::uint64_t{1024}},
           {AlgorithmConfig{Algorithm::ChainPipelined, 0, 0}}, {}, p,
           CostOracle::Analytical),
      std::invalid_argument);
}

TEST_CASE("file-based round trip") {
  namespace fs = std::filesystem;
  const auto table =
      tune({4}, power_of_two_sizes(1024, 65536), default_candidates(),
           default_chunks(), baseline(), CostOracle::Analytical);
  const fs::path path =
      fs::temp_directory_path() / "bcastlab_tuner_roundtrip.csv";
  save_table(table, path);
  CHECK(load_table(path) == table);
  fs::remove(path);
  CHECK_THROWS(load_table(path));
}
