// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/tuner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "bcastlab/models.hpp"
#include "bcastlab/schedules.hpp"
#include "bcastlab/simengine.hpp"

namespace bcastlab {

namespace {

constexpr std::string_view kHeader =
    "n,msg_min_bytes,msg_max_bytes,algorithm,radix,chunk_bytes,"
    "predicted_cost_s";

std::uint64_t geometric_mean(std::uint64_t lo, std::uint64_t hi) {
  return static_cast<std::uint64_t>(
      std::llround(std::sqrt(static_cast<double>(lo) *
                             static_cast<double>(hi))));
}

struct Winner {
  AlgorithmConfig config{};
  double cost_s{};
};

Winner pick_winner(const std::vector<AlgorithmConfig>& expanded, int n,
                   std::uint64_t message_bytes, const NetworkParams& params,
                   CostOracle oracle) {
  Winner best{};
  bool have = false;
  for (const AlgorithmConfig& c : expanded) {
    const double cost = evaluate_cost(c, n, message_bytes, params, oracle);
    if (!have || beats(cost, c, best.cost_s, best.config)) {
      best = Winner{c, cost};
      have = true;
    }
  }
  if (!have) {
    throw std::invalid_argument("no evaluable candidate");
  }
  return best;
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, res.ptr);
}

}  // namespace

std::string_view oracle_name(CostOracle oracle) {
  return oracle == CostOracle::Analytical ? "analytical" : "simulated";
}

std::optional<CostOracle> oracle_from_name(std::string_view name) {
  if (name == "analytical") return CostOracle::Analytical;
  if (name == "simulated") return CostOracle::Simulated;
  return std::nullopt;
}

double evaluate_cost(const AlgorithmConfig& config, int n,
                     std::uint64_t message_bytes, const NetworkParams& params,
                     CostOracle oracle) {
  if (oracle == CostOracle::Analytical) {
    return cost_for(config, n, message_bytes, params).total_s;
  }
  return simulate(make_schedule(config, n, 0, message_bytes), params)
      .max_completion_s();
}

bool beats(double lhs_cost, const AlgorithmConfig& lhs, double rhs_cost,
           const AlgorithmConfig& rhs) {
  if (lhs_cost != rhs_cost) return lhs_cost < rhs_cost;
  if (lhs.algorithm != rhs.algorithm) return lhs.algorithm < rhs.algorithm;
  if (lhs.chunk_bytes != rhs.chunk_bytes) {
    return lhs.chunk_bytes < rhs.chunk_bytes;
  }
  return lhs.radix_k < rhs.radix_k;
}

std::vector<AlgorithmConfig> expand_candidates(
    const std::vector<AlgorithmConfig>& candidates,
    const std::vector<std::uint64_t>& chunk_candidates,
    std::uint64_t message_bytes) {
  std::vector<AlgorithmConfig> expanded;
  for (const AlgorithmConfig& c : candidates) {
    if (c.algorithm != Algorithm::ChainPipelined) {
      expanded.push_back(c);
      continue;
    }
    for (std::uint64_t chunk : chunk_candidates) {
      AlgorithmConfig pipelined = c;
      pipelined.chunk_bytes =
          std::max<std::uint64_t>(1, std::min(chunk, std::max<std::uint64_t>(
                                                         message_bytes, 1)));
      if (std::find(expanded.begin(), expanded.end(), pipelined) ==
          expanded.end()) {
        expanded.push_back(pipelined);
      }
    }
  }
  return expanded;
}

TuningTable tune(const std::vector<int>& n_list,
                 const std::vector<std::uint64_t>& msg_sizes,
                 const std::vector<AlgorithmConfig>& candidates,
                 const std::vector<std::uint64_t>& chunk_candidates,
                 const NetworkParams& params, CostOracle oracle) {
  params.validate();
  if (n_list.empty() || msg_sizes.empty() || candidates.empty()) {
    throw std::invalid_argument("tune needs ranks, sizes, and candidates");
  }
  for (std::size_t i = 0; i + 1 < msg_sizes.size(); ++i) {
    if (msg_sizes[i] >= msg_sizes[i + 1]) {
      throw std::invalid_argument("message sizes must be strictly increasing");
    }
  }
  if (msg_sizes.front() == 0) {
    throw std::invalid_argument("message sizes must be >= 1");
  }

  // Range boundaries sit at the geometric mean of adjacent swept sizes so
  // the evaluation point of each elementary range is its geometric midpoint.
  std::vector<std::uint64_t> bounds;
  bounds.push_back(msg_sizes.front());
  for (std::size_t i = 0; i + 1 < msg_sizes.size(); ++i) {
    bounds.push_back(geometric_mean(msg_sizes[i], msg_sizes[i + 1]));
  }
  bounds.push_back(msg_sizes.back() * 2);

  TuningTable table;
  table.oracle = oracle;
  for (int n : n_list) {
    std::vector<TuningEntry> row;
    for (std::size_t i = 0; i < msg_sizes.size(); ++i) {
      const auto expanded =
          expand_candidates(candidates, chunk_candidates, msg_sizes[i]);
      const Winner w =
          pick_winner(expanded, n, msg_sizes[i], params, oracle);
      if (!row.empty() && row.back().config == w.config) {
        row.back().msg_max_bytes = bounds[i + 1];
        continue;
      }
      row.push_back(TuningEntry{n, bounds[i], bounds[i + 1], w.config, 0.0});
    }
    // Predicted cost is re-evaluated at the merged range's geometric
    // midpoint (the swept size itself for unmerged entries).
    for (TuningEntry& e : row) {
      const std::uint64_t midpoint =
          geometric_mean(e.msg_min_bytes, e.msg_max_bytes);
      e.predicted_cost_s =
          evaluate_cost(e.config, n, midpoint, params, oracle);
    }
    table.entries.insert(table.entries.end(), row.begin(), row.end());
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const TuningEntry& a, const TuningEntry& b) {
                     if (a.n != b.n) return a.n < b.n;
                     return a.msg_min_bytes < b.msg_min_bytes;
                   });
  return table;
}

AlgorithmConfig select(const TuningTable& table, int n,
                       std::uint64_t message_bytes) {
  if (table.entries.empty()) {
    throw std::out_of_range("tuning table is empty");
  }
  int chosen_n = -1;
  for (const TuningEntry& e : table.entries) {
    if (e.n <= n && e.n > chosen_n) chosen_n = e.n;
  }
  if (chosen_n < 0) {
    throw std::out_of_range("no tuned rank count <= " + std::to_string(n));
  }
  const TuningEntry* match = nullptr;
  for (const TuningEntry& e : table.entries) {
    if (e.n != chosen_n) continue;
    match = &e;  // entries are sorted: ends on the last range otherwise
    if (message_bytes < e.msg_max_bytes) break;
  }
  return match->config;
}

TableParseError::TableParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line) {}

void save_table(const TuningTable& table, std::ostream& out) {
  std::string text;
  text += "# oracle: ";
  text += oracle_name(table.oracle);
  text += '\n';
  text += kHeader;
  text += '\n';
  for (const TuningEntry& e : table.entries) {
    text += std::to_string(e.n);
    text += ',';
    text += std::to_string(e.msg_min_bytes);
    text += ',';
    text += std::to_string(e.msg_max_bytes);
    text += ',';
    text += algorithm_name(e.config.algorithm);
    text += ',';
    text += std::to_string(
        algorithm_uses_radix(e.config.algorithm) ? e.config.radix_k : 0);
    text += ',';
    text += std::to_string(
        algorithm_uses_chunk(e.config.algorithm) ? e.config.chunk_bytes : 0);
    text += ',';
    append_number(text, e.predicted_cost_s);
    text += '\n';
  }
  out << text;
}

void save_table(const TuningTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  save_table(table, out);
  if (!out.flush()) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw TableParseError(line_no, "bad numeric field '" + text + "'");
  }
  return value;
}

}  // namespace

TuningTable load_table(std::istream& in) {
  TuningTable table;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# oracle:", 0) == 0) {
      std::string name = line.substr(sizeof("# oracle:") - 1);
      name.erase(0, name.find_first_not_of(' '));
      const auto oracle = oracle_from_name(name);
      if (!oracle) {
        throw TableParseError(line_no, "unknown oracle '" + name + "'");
      }
      table.oracle = *oracle;
      continue;
    }
    if (line[0] == '#') continue;
    if (!saw_header) {
      if (line != kHeader) {
        throw TableParseError(line_no, "missing table header");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw TableParseError(line_no, "expected 7 fields, got " +
                                         std::to_string(fields.size()));
    }
    TuningEntry e;
    e.n = parse_number<int>(fields[0], line_no);
    e.msg_min_bytes = parse_number<std::uint64_t>(fields[1], line_no);
    e.msg_max_bytes = parse_number<std::uint64_t>(fields[2], line_no);
    const auto algo = algorithm_from_name(fields[3]);
    if (!algo) {
      throw TableParseError(line_no, "unknown algorithm '" + fields[3] + "'");
    }
    e.config.algorithm = *algo;
    e.config.radix_k = parse_number<int>(fields[4], line_no);
    e.config.chunk_bytes = parse_number<std::uint64_t>(fields[5], line_no);
    {
      double cost{};
      const std::string& text = fields[6];
      const auto res =
          std::from_chars(text.data(), text.data() + text.size(), cost);
      if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw TableParseError(line_no, "bad cost field '" + text + "'");
      }
      e.predicted_cost_s = cost;
    }
    if (e.n < 1) {
      throw TableParseError(line_no, "rank count must be >= 1");
    }
    if (e.msg_min_bytes >= e.msg_max_bytes) {
      throw TableParseError(line_no, "empty message-size range");
    }
    table.entries.push_back(e);
  }
  if (!saw_header) {
    throw TableParseError(line_no, "missing table header");
  }
  if (table.entries.empty()) {
    throw TableParseError(line_no, "table has no entries");
  }
  // Ranges of one rank count must be sorted and disjoint.
  std::map<int, std::uint64_t> last_max;
  for (const TuningEntry& e : table.entries) {
    const auto it = last_max.find(e.n);
    if (it != last_max.end() && e.msg_min_bytes < it->second) {
      throw TableParseError(line_no, "overlapping or unsorted ranges for n=" +
                                         std::to_string(e.n));
    }
    last_max[e.n] = e.msg_max_bytes;
  }
  return table;
}

TuningTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return load_table(in);
}

}  // namespace bcastlab
