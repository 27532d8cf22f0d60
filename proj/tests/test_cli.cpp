// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bcastlab/tuner.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code{};
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string command =
      std::string(BCASTLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) {
    output.append(buf, got);
  }
  const int status = pclose(pipe);
  return RunResult{WEXITSTATUS(status), output};
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("bcastlab_cli_" + name);
}

double grep_value(const std::string& output, const std::string& key) {
  const auto pos = output.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(output.substr(pos + key.size()));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("model prints the chain cost") {
  const auto r = run_cli(
      "model --algo chain --n 4 --msg-size 1000000 --bandwidth 1e9 "
      "--startup 1e-6");
  CHECK(r.exit_code == 0);
  CHECK(grep_value(r.output, "total_s") == doctest::Approx(3.003e-3));
}

TEST_CASE("model prints the pipelined chain cost") {
  const auto r = run_cli(
      "model --algo chain_pipelined --n 4 --msg-size 1000000 --chunk 125000");
  CHECK(r.exit_code == 0);
  CHECK(grep_value(r.output, "total_s") == doctest::Approx(1.26e-3));
}

TEST_CASE("model flags usage errors") {
  CHECK(run_cli("model --algo knomial --n 8 --msg-size 1024").exit_code == 2);
  CHECK(run_cli("model --algo nope --n 8 --msg-size 1024").exit_code == 2);
  CHECK(run_cli("model --n 8 --msg-size 1024").exit_code == 2);
  CHECK(run_cli("model --algo chain_pipelined --n 4 --msg-size 64")
            .exit_code == 2);
}

TEST_CASE("staged model exposes the staging term") {
  const auto r = run_cli(
      "model --algo knomial_staged --n 8 --msg-size 1000000 --radix 2 "
      "--pcie-bandwidth 1e10");
  CHECK(r.exit_code == 0);
  CHECK(grep_value(r.output, "total_s") == doctest::Approx(3.103e-3));
  CHECK(grep_value(r.output, "staging_term_s") == doctest::Approx(1e-4));
}

TEST_CASE("simulate reports completion and coverage") {
  const auto r = run_cli("simulate --algo chain --n 3 --msg-size 1000000");
  CHECK(r.exit_code == 0);
  CHECK(grep_value(r.output, "completion_s") == doctest::Approx(2.002e-3));
  CHECK(r.output.find("coverage       ok") != std::string::npos);

  const auto single = run_cli("simulate --algo chain --n 1 --msg-size 4096");
  CHECK(single.exit_code == 0);
  CHECK(grep_value(single.output, "completion_s") == doctest::Approx(0.0));
}

TEST_CASE("simulate writes one trace row per event") {
  const fs::path trace = temp_file("trace.csv");
  const auto r = run_cli(
      "simulate --algo knomial --n 8 --radix 2 --msg-size 4096 --trace " +
      trace.string());
  CHECK(r.exit_code == 0);
  const std::string text = read_file(trace);
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  // 7 sends + 7 recvs + header.
  CHECK(lines == 15);
  fs::remove(trace);
}

TEST_CASE("tune writes a loadable, deterministic table") {
  const fs::path a = temp_file("tune_a.csv");
  const fs::path b = temp_file("tune_b.csv");
  const std::string flags = "tune --n-list 4 8 --min-size 1024 "
                            "--max-size 1048576 --out ";
  const auto first = run_cli(flags + a.string());
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("n=4: knomial -> chain_pipelined") !=
        std::string::npos);
  const auto second = run_cli(flags + b.string());
  CHECK(second.exit_code == 0);
  CHECK(read_file(a) == read_file(b));

  const auto table = bcastlab::load_table(a);
  CHECK(!table.entries.empty());
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("tune refuses an unwritable output path") {
  const auto r = run_cli("tune --out /nonexistent-dir/table.csv");
  CHECK(r.exit_code == 1);
}

TEST_CASE("bench sweeps powers of two and writes matching CSV") {
  const fs::path csv = temp_file("bench.csv");
  const auto r = run_cli(
      "bench --n 4 --algo chain --min-size 1 --max-size 1024 --iterations 4 "
      "--warmup 1 --csv " +
      csv.string());
  CHECK(r.exit_code == 0);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "size_bytes,algorithm,chunk_bytes,avg_us,min_us,max_us,iterations");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 11);  // 1,2,4,...,1024
  CHECK(rows.front().rfind("1,chain,0,", 0) == 0);
  CHECK(rows.back().rfind("1024,chain,0,", 0) == 0);
  fs::remove(csv);
}

TEST_CASE("bench auto matches the tuning table per size") {
  const fs::path table_path = temp_file("bench_table.csv");
  CHECK(run_cli("tune --n-list 4 --min-size 1024 --max-size 262144 --out " +
                table_path.string())
            .exit_code == 0);
  const fs::path csv = temp_file("bench_auto.csv");
  const auto r = run_cli(
      "bench --n 4 --algo auto --table " + table_path.string() +
      " --min-size 1024 --max-size 262144 --iterations 2 --warmup 0 --csv " +
      csv.string());
  CHECK(r.exit_code == 0);

  const auto table = bcastlab::load_table(table_path);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::uint64_t size = 1024;
  while (std::getline(in, line)) {
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    const std::string size_text = line.substr(0, first_comma);
    const std::string algo_text =
        line.substr(first_comma + 1, second_comma - first_comma - 1);
    CHECK(std::stoull(size_text) == size);
    const auto expected = bcastlab::select(table, 4, size);
    CHECK(algo_text == bcastlab::algorithm_name(expected.algorithm));
    size *= 2;
  }
  CHECK(size == 524288);
  fs::remove(table_path);
  fs::remove(csv);
}

TEST_CASE("bench rejects auto without a table") {
  CHECK(run_cli("bench --n 4 --algo auto").exit_code == 2);
  CHECK(run_cli("bench --n 4 --algo nope").exit_code == 2);
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("bench --help").exit_code == 0);
  const auto r = run_cli("");
  CHECK(r.exit_code == 2);
}

TEST_CASE("socket transport benchmark round-trips") {
  const auto r = run_cli(
      "bench --n 3 --algo knomial --radix 2 --min-size 64 --max-size 256 "
      "--iterations 3 --warmup 1 --transport socket");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("256") != std::string::npos);
}
