// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: closed-form model evaluation, schedule simulation,
// tuning-table generation, and an osu_bcast-style latency benchmark.

#include <CLI11.hpp>

#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "bcastlab/models.hpp"
#include "bcastlab/runtime.hpp"
#include "bcastlab/schedules.hpp"
#include "bcastlab/simengine.hpp"
#include "bcastlab/tuner.hpp"

namespace {

using namespace bcastlab;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ParamFlags {
  double bandwidth = 1e9;
  double startup = 1e-6;
  double pcie_bandwidth = 1e10;

  NetworkParams to_params() const {
    return NetworkParams{startup, bandwidth, pcie_bandwidth};
  }
};

void add_param_flags(CLI::App& cmd, ParamFlags& flags) {
  cmd.add_option("--bandwidth", flags.bandwidth, "Link bandwidth in bytes/s")
      ->capture_default_str();
  cmd.add_option("--startup", flags.startup, "Per-transfer startup in seconds")
      ->capture_default_str();
  cmd.add_option("--pcie-bandwidth", flags.pcie_bandwidth,
                 "Host staging bandwidth in bytes/s")
      ->capture_default_str();
}

std::uint64_t to_bytes(double value, const char* what) {
  if (!(value >= 0) || value > 1.8e19 || value != std::floor(value)) {
    throw CLI::ValidationError(std::string(what) +
                               " must be a non-negative whole byte count");
  }
  return static_cast<std::uint64_t>(value);
}

// Resolves --algo/--radix/--chunk into a config, enforcing that the
// parameters an algorithm uses were actually given.
AlgorithmConfig resolve_config(const std::string& algo_name, int radix,
                               bool has_radix, double chunk, bool has_chunk) {
  const auto algo = algorithm_from_name(algo_name);
  if (!algo) {
    throw CLI::ValidationError("unknown algorithm '" + algo_name + "'");
  }
  AlgorithmConfig config{*algo, 0, 0};
  if (algorithm_uses_radix(*algo)) {
    if (!has_radix) {
      throw CLI::ValidationError("--radix is required for " + algo_name);
    }
    if (radix < 2) {
      throw CLI::ValidationError("--radix must be >= 2");
    }
    config.radix_k = radix;
  }
  if (algorithm_uses_chunk(*algo)) {
    if (!has_chunk) {
      throw CLI::ValidationError("--chunk is required for " + algo_name);
    }
    config.chunk_bytes = to_bytes(chunk, "--chunk");
    if (config.chunk_bytes == 0) {
      throw CLI::ValidationError("--chunk must be >= 1");
    }
  }
  return config;
}

void print_cost(const AlgorithmConfig& config, int n, std::uint64_t message,
                const CostBreakdown& cost) {
  std::printf("algorithm         %s\n",
              std::string(algorithm_name(config.algorithm)).c_str());
  std::printf("n                 %d\n", n);
  std::printf("message_bytes     %llu\n",
              static_cast<unsigned long long>(message));
  if (algorithm_uses_radix(config.algorithm)) {
    std::printf("radix             %d\n", config.radix_k);
  }
  if (algorithm_uses_chunk(config.algorithm)) {
    std::printf("chunk_bytes       %llu\n",
                static_cast<unsigned long long>(config.chunk_bytes));
  }
  std::printf("total_s           %.6g\n", cost.total_s);
  std::printf("startup_term_s    %.6g\n", cost.startup_term_s);
  std::printf("bandwidth_term_s  %.6g\n", cost.bandwidth_term_s);
  std::printf("staging_term_s    %.6g\n", cost.staging_term_s);
}

// ---------------------------------------------------------------------------
// bench

struct BenchFlags {
  int n = 2;
  std::string algo;
  std::string table_path;
  double min_size = 1;
  double max_size = 4194304;
  int iterations = 100;
  int warmup = 10;
  std::string transport = "inproc";
  std::string csv_path;
  std::uint64_t seed = 1;
  int base_port = 0;
  int root = 0;
  int radix = 0;
  bool has_radix = false;
  double chunk = 0;
  bool has_chunk = false;
};

struct BenchRow {
  std::uint64_t size_bytes{};
  AlgorithmConfig config{};
  double avg_us{};
  double min_us{};
  double max_us{};
  int iterations{};
};

std::vector<std::uint8_t> payload_for(std::uint64_t seed, std::uint64_t size) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + size + 1);
  std::vector<std::uint8_t> data(size);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  return data;
}

BenchRow run_bench_size(const AlgorithmConfig& config, int n, int root,
                        std::uint64_t size, int warmup, int iterations,
                        std::uint64_t seed, TransportFabric& fabric) {
  const Schedule schedule = make_schedule(config, n, root, size);
  const auto payload = payload_for(seed, size);

  std::vector<std::vector<std::uint8_t>> buffers(
      static_cast<std::size_t>(n), std::vector<std::uint8_t>(size));
  buffers[static_cast<std::size_t>(root)] = payload;

  std::barrier sync(n);
  std::vector<double> rank_elapsed_us(static_cast<std::size_t>(n), 0.0);
  std::vector<double> latencies_us;
  latencies_us.reserve(static_cast<std::size_t>(iterations));

  const int total = warmup + iterations;
  launch_ranks(n, [&](int rank) {
    auto& buffer = buffers[static_cast<std::size_t>(rank)];
    for (int iter = 0; iter < total; ++iter) {
      if (rank != root) {
        std::fill(buffer.begin(), buffer.end(), 0);
      }
      sync.arrive_and_wait();
      const auto t0 = std::chrono::steady_clock::now();
      execute_rank(schedule, rank, buffer, fabric.endpoint(rank));
      const auto t1 = std::chrono::steady_clock::now();
      // Correctness gates the measurement: a corrupt buffer aborts the run
      // before any timing is recorded.
      if (buffer != payload) {
        throw std::runtime_error("buffer mismatch at size " +
                                 std::to_string(size) + ", iteration " +
                                 std::to_string(iter));
      }
      rank_elapsed_us[static_cast<std::size_t>(rank)] =
          std::chrono::duration<double, std::micro>(t1 - t0).count();
      sync.arrive_and_wait();
      if (rank == root && iter >= warmup) {
        double worst = 0.0;
        for (double e : rank_elapsed_us) worst = std::max(worst, e);
        latencies_us.push_back(worst);
      }
      sync.arrive_and_wait();
    }
  });

  BenchRow row;
  row.size_bytes = size;
  row.config = config;
  row.iterations = iterations;
  row.min_us = latencies_us.empty() ? 0.0 : latencies_us.front();
  row.max_us = 0.0;
  double sum = 0.0;
  for (double l : latencies_us) {
    sum += l;
    row.min_us = std::min(row.min_us, l);
    row.max_us = std::max(row.max_us, l);
  }
  row.avg_us = latencies_us.empty() ? 0.0 : sum / latencies_us.size();
  return row;
}

int cmd_bench(const BenchFlags& flags) {
  if (flags.n < 1 || flags.root < 0 || flags.root >= flags.n) {
    throw CLI::ValidationError("need --n >= 1 and --root in [0, n)");
  }
  if (flags.iterations < 1 || flags.warmup < 0) {
    throw CLI::ValidationError("need --iterations >= 1 and --warmup >= 0");
  }

  const bool automatic = flags.algo == "auto";
  TuningTable table;
  AlgorithmConfig fixed{};
  if (automatic) {
    if (flags.table_path.empty()) {
      throw CLI::ValidationError("--table is required with --algo auto");
    }
    table = load_table(flags.table_path);
  } else {
    fixed = resolve_config(flags.algo, flags.radix, flags.has_radix,
                           flags.chunk, flags.has_chunk);
    if (fixed.algorithm == Algorithm::ChainPipelined && flags.n < 2) {
      throw CLI::ValidationError("chain_pipelined needs --n >= 2");
    }
  }

  std::unique_ptr<TransportFabric> fabric;
  if (flags.transport == "inproc") {
    fabric = make_inproc_fabric(flags.n);
  } else if (flags.transport == "socket") {
    fabric = make_socket_fabric(flags.n,
                                static_cast<std::uint16_t>(flags.base_port));
  } else {
    throw CLI::ValidationError("unknown transport '" + flags.transport + "'");
  }

  const std::uint64_t min_size = to_bytes(flags.min_size, "--min-size");
  const std::uint64_t max_size = to_bytes(flags.max_size, "--max-size");
  if (min_size > max_size) {
    throw CLI::ValidationError("--min-size must be <= --max-size");
  }

  std::printf("# bcastlab bench: n=%d root=%d transport=%s iterations=%d "
              "warmup=%d seed=%llu\n",
              flags.n, flags.root, flags.transport.c_str(), flags.iterations,
              flags.warmup, static_cast<unsigned long long>(flags.seed));
  std::printf("%-12s %-24s %-12s %10s %10s %10s\n", "size_bytes", "algorithm",
              "chunk_bytes", "avg_us", "min_us", "max_us");

  std::vector<BenchRow> rows;
  for (std::uint64_t size = min_size;;) {
    AlgorithmConfig config = fixed;
    if (automatic) {
      config = select(table, flags.n, size);
      if (config.algorithm == Algorithm::ChainPipelined) {
        config.chunk_bytes =
            std::max<std::uint64_t>(1, std::min(config.chunk_bytes,
                                                std::max<std::uint64_t>(size,
                                                                        1)));
      }
    }
    const BenchRow row =
        run_bench_size(config, flags.n, flags.root, size, flags.warmup,
                       flags.iterations, flags.seed, *fabric);
    rows.push_back(row);
    std::printf("%-12llu %-24s %-12llu %10.2f %10.2f %10.2f\n",
                static_cast<unsigned long long>(row.size_bytes),
                std::string(algorithm_name(row.config.algorithm)).c_str(),
                static_cast<unsigned long long>(
                    algorithm_uses_chunk(row.config.algorithm)
                        ? row.config.chunk_bytes
                        : 0),
                row.avg_us, row.min_us, row.max_us);
    if (size >= max_size || size > max_size / 2) break;
    size = size == 0 ? 1 : size * 2;  // a zero-byte floor still sweeps up
  }

  if (!flags.csv_path.empty()) {
    std::ofstream out(flags.csv_path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open " + flags.csv_path);
    }
    out << "size_bytes,algorithm,chunk_bytes,avg_us,min_us,max_us,"
           "iterations\n";
    char line[256];
    for (const BenchRow& row : rows) {
      std::snprintf(
          line, sizeof line, "%llu,%s,%llu,%.3f,%.3f,%.3f,%d\n",
          static_cast<unsigned long long>(row.size_bytes),
          std::string(algorithm_name(row.config.algorithm)).c_str(),
          static_cast<unsigned long long>(
              algorithm_uses_chunk(row.config.algorithm)
                  ? row.config.chunk_bytes
                  : 0),
          row.avg_us, row.min_us, row.max_us, row.iterations);
      out << line;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// tune

int cmd_tune(const std::vector<int>& n_list, double min_size, double max_size,
             const std::vector<std::string>& candidate_names, int radix,
             const std::vector<double>& chunk_flags,
             const std::string& oracle_name_flag, const ParamFlags& params,
             const std::string& out_path) {
  const std::uint64_t lo = to_bytes(min_size, "--min-size");
  const std::uint64_t hi = to_bytes(max_size, "--max-size");
  if (lo < 1 || lo > hi) {
    throw CLI::ValidationError("need 1 <= --min-size <= --max-size");
  }
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t s = lo; s <= hi; s *= 2) {
    sizes.push_back(s);
    if (s > hi / 2) break;
  }

  std::vector<AlgorithmConfig> candidates;
  for (const std::string& name : candidate_names) {
    const auto algo = algorithm_from_name(name);
    if (!algo) {
      throw CLI::ValidationError("unknown algorithm '" + name + "'");
    }
    AlgorithmConfig c{*algo, 0, 0};
    if (algorithm_uses_radix(*algo)) c.radix_k = radix;
    candidates.push_back(c);
  }

  std::vector<std::uint64_t> chunks;
  if (chunk_flags.empty()) {
    for (std::uint64_t c = 8192; c <= 4194304; c *= 2) chunks.push_back(c);
  } else {
    for (double c : chunk_flags) {
      const std::uint64_t bytes = to_bytes(c, "--chunks");
      if (bytes == 0) throw CLI::ValidationError("--chunks must be >= 1");
      chunks.push_back(bytes);
    }
  }

  const auto oracle = oracle_from_name(oracle_name_flag);
  if (!oracle) {
    throw CLI::ValidationError("unknown oracle '" + oracle_name_flag + "'");
  }

  const TuningTable table =
      tune(n_list, sizes, candidates, chunks, params.to_params(), *oracle);
  save_table(table, std::filesystem::path(out_path));

  std::printf("wrote %s (%zu entries, %s oracle)\n", out_path.c_str(),
              table.entries.size(),
              std::string(bcastlab::oracle_name(*oracle)).c_str());
  for (int n : n_list) {
    const TuningEntry* previous = nullptr;
    std::string summary;
    for (const TuningEntry& e : table.entries) {
      if (e.n != n) continue;
      if (previous == nullptr) {
        summary = std::string(algorithm_name(e.config.algorithm));
      } else if (previous->config.algorithm != e.config.algorithm) {
        summary += " -> " + std::string(algorithm_name(e.config.algorithm)) +
                   " at " + std::to_string(e.msg_min_bytes) + " bytes";
      }
      previous = &e;
    }
    std::printf("n=%d: %s\n", n, summary.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{
      "Broadcast laboratory: analytical cost models, an event-driven "
      "schedule simulator, a tuning-table generator, and a multi-rank "
      "latency benchmark."};
  app.require_subcommand(1);

  // model ------------------------------------------------------------------
  auto* model = app.add_subcommand(
      "model", "Evaluate a closed-form broadcast cost");
  std::string model_algo;
  int model_n = 0;
  double model_msg = 0;
  int model_radix = 0;
  double model_chunk = 0;
  ParamFlags model_params;
  model->add_option("--algo", model_algo, "Algorithm name")->required();
  model->add_option("--n", model_n, "Number of ranks")->required();
  model->add_option("--msg-size", model_msg, "Message size in bytes")
      ->required();
  auto* model_radix_opt = model->add_option("--radix", model_radix,
                                            "Tree radix (k-nomial family)");
  auto* model_chunk_opt =
      model->add_option("--chunk", model_chunk, "Chunk size in bytes");
  add_param_flags(*model, model_params);

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand(
      "simulate", "Simulate a generated schedule event by event");
  std::string sim_algo;
  int sim_n = 0;
  int sim_root = 0;
  double sim_msg = 0;
  int sim_radix = 0;
  double sim_chunk = 0;
  std::string sim_trace;
  ParamFlags sim_params;
  sim->add_option("--algo", sim_algo, "Algorithm name")->required();
  sim->add_option("--n", sim_n, "Number of ranks")->required();
  sim->add_option("--msg-size", sim_msg, "Message size in bytes")->required();
  sim->add_option("--root", sim_root, "Root rank")->capture_default_str();
  auto* sim_radix_opt =
      sim->add_option("--radix", sim_radix, "Tree radix (k-nomial family)");
  auto* sim_chunk_opt =
      sim->add_option("--chunk", sim_chunk, "Chunk size in bytes");
  sim->add_option("--trace", sim_trace, "Write a per-event CSV trace here");
  add_param_flags(*sim, sim_params);

  // tune ---------------------------------------------------------------
  auto* tune_cmd = app.add_subcommand(
      "tune", "Select the best algorithm per rank count and size range");
  std::vector<int> tune_n{4, 8, 16};
  double tune_min = 1024;
  double tune_max = 4194304;
  std::vector<std::string> tune_candidates{"knomial", "chain_pipelined"};
  int tune_radix = 2;
  std::vector<double> tune_chunks;
  std::string tune_oracle = "analytical";
  std::string tune_out;
  ParamFlags tune_params;
  tune_cmd->add_option("--n-list", tune_n, "Rank counts to tune")
      ->capture_default_str();
  tune_cmd->add_option("--min-size", tune_min, "Smallest swept size (bytes)")
      ->capture_default_str();
  tune_cmd->add_option("--max-size", tune_max, "Largest swept size (bytes)")
      ->capture_default_str();
  tune_cmd->add_option("--candidates", tune_candidates, "Candidate algorithms")
      ->capture_default_str();
  tune_cmd->add_option("--radix", tune_radix, "Radix for tree candidates")
      ->capture_default_str();
  tune_cmd->add_option("--chunks", tune_chunks,
                       "Chunk candidates (default powers of two 8K..4M)");
  tune_cmd->add_option("--oracle", tune_oracle, "analytical or simulated")
      ->capture_default_str();
  tune_cmd->add_option("--out", tune_out, "Output table path")->required();
  add_param_flags(*tune_cmd, tune_params);

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand(
      "bench", "Measure broadcast latency over a real transport");
  BenchFlags bf;
  bench->add_option("--n", bf.n, "Number of ranks")->required();
  bench->add_option("--algo", bf.algo, "Algorithm name, or 'auto'")
      ->required();
  bench->add_option("--table", bf.table_path, "Tuning table for 'auto'");
  bench->add_option("--min-size", bf.min_size, "Smallest size (bytes)")
      ->capture_default_str();
  bench->add_option("--max-size", bf.max_size, "Largest size (bytes)")
      ->capture_default_str();
  bench->add_option("--iterations", bf.iterations, "Timed iterations per size")
      ->capture_default_str();
  bench->add_option("--warmup", bf.warmup, "Warmup iterations per size")
      ->capture_default_str();
  bench->add_option("--transport", bf.transport, "inproc or socket")
      ->capture_default_str();
  bench->add_option("--csv", bf.csv_path, "Write results to this CSV");
  bench->add_option("--seed", bf.seed, "Payload seed")->capture_default_str();
  bench->add_option("--base-port", bf.base_port,
                    "Socket transport base port (0 = pick freely)")
      ->capture_default_str();
  bench->add_option("--root", bf.root, "Root rank")->capture_default_str();
  auto* bench_radix_opt =
      bench->add_option("--radix", bf.radix, "Tree radix (k-nomial family)");
  auto* bench_chunk_opt =
      bench->add_option("--chunk", bf.chunk, "Chunk size in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (model->parsed()) {
    const AlgorithmConfig config =
        resolve_config(model_algo, model_radix, !model_radix_opt->empty(),
                       model_chunk, !model_chunk_opt->empty());
    const std::uint64_t message = to_bytes(model_msg, "--msg-size");
    print_cost(config, model_n, message,
               cost_for(config, model_n, message, model_params.to_params()));
    return kExitOk;
  }

  if (sim->parsed()) {
    const AlgorithmConfig config =
        resolve_config(sim_algo, sim_radix, !sim_radix_opt->empty(), sim_chunk,
                       !sim_chunk_opt->empty());
    const std::uint64_t message = to_bytes(sim_msg, "--msg-size");
    const Schedule schedule = make_schedule(config, sim_n, sim_root, message);
    SimOptions options;
    options.record_trace = !sim_trace.empty();
    const SimResult result =
        simulate(schedule, sim_params.to_params(), options);
    std::printf("algorithm      %s\n",
                std::string(algorithm_name(config.algorithm)).c_str());
    std::printf("n              %d\n", sim_n);
    std::printf("message_bytes  %llu\n",
                static_cast<unsigned long long>(message));
    std::printf("completion_s   %.6g\n", result.max_completion_s());
    std::printf("coverage       %s\n", result.coverage_ok ? "ok" : "FAILED");
    if (!sim_trace.empty()) {
      std::ofstream out(sim_trace, std::ios::binary);
      if (!out) {
        throw std::runtime_error("cannot open " + sim_trace);
      }
      write_trace_csv(result, out);
    }
    return result.coverage_ok ? kExitOk : kExitRuntime;
  }

  if (tune_cmd->parsed()) {
    return cmd_tune(tune_n, tune_min, tune_max, tune_candidates, tune_radix,
                    tune_chunks, tune_oracle, tune_params, tune_out);
  }

  bf.has_radix = !bench_radix_opt->empty();
  bf.has_chunk = !bench_chunk_opt->empty();
  return cmd_bench(bf);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
