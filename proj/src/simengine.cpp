// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/simengine.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <stdexcept>
#include <tuple>

namespace bcastlab {

namespace {

constexpr double kNotOwned = std::numeric_limits<double>::infinity();

struct PendingRecv {
  std::size_t event_index;
  int src;
  std::uint32_t chunk;
};

// One wire transfer: a run of consecutive same-peer sends out of a batch.
struct Transfer {
  int dst{};
  std::vector<std::size_t> event_indices;
  std::vector<std::uint32_t> chunks;
  std::uint64_t bytes{};
};

// A batch is the unit of progress on a rank's outgoing port: either a single
// ungrouped send or a run of equal-group sends that start simultaneously.
struct Batch {
  std::vector<Transfer> transfers;
};

struct RankState {
  std::vector<Batch> batches;
  std::vector<PendingRecv> recvs;
  std::size_t batch_cursor{0};
  std::size_t recv_cursor{0};
  double out_free_s{0.0};
  double last_recv_end_s{0.0};
  double completion_s{0.0};
};

double prologue_seconds(const Schedule& s, const NetworkParams& p) {
  switch (s.prologue) {
    case RootPrologue::None:
      return 0.0;
    case RootPrologue::SelfSend:
      return p.startup_s +
             static_cast<double>(s.message_bytes) / p.link_bandwidth_Bps;
    case RootPrologue::HostStaging:
      return static_cast<double>(s.message_bytes) / p.staging_bandwidth_Bps;
  }
  return 0.0;
}

}  // namespace

double SimResult::max_completion_s() const {
  double max = 0.0;
  for (double c : completion_s) max = std::max(max, c);
  return max;
}

SimResult simulate(const Schedule& s, const NetworkParams& p,
                   const SimOptions& options) {
  p.validate();
  if (auto bad = validate_schedule(s)) {
    throw std::invalid_argument("invalid schedule: " + bad->description +
                                " (rank " + std::to_string(bad->rank) +
                                ", event " + std::to_string(bad->event_index) +
                                ")");
  }

  const auto n = static_cast<std::size_t>(s.n_ranks);
  const std::size_t n_chunks = s.chunks.size();

  std::vector<RankState> ranks(n);
  std::vector<std::vector<double>> owned_at(
      n, std::vector<double>(n_chunks, kNotOwned));
  for (std::size_t c = 0; c < n_chunks; ++c) {
    owned_at[static_cast<std::size_t>(s.root)][c] = 0.0;
  }

  std::size_t total_batches = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& ops = s.per_rank_ops[r];
    Batch* open = nullptr;
    std::uint32_t open_group = 0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Event& e = ops[i];
      if (e.kind == Event::Kind::Recv) {
        ranks[r].recvs.push_back(PendingRecv{i, e.peer, e.chunk});
        open = nullptr;
        continue;
      }
      const bool extend = open != nullptr && e.group != 0 &&
                          e.group == open_group;
      if (!extend) {
        ranks[r].batches.emplace_back();
        open = &ranks[r].batches.back();
        open_group = e.group;
      }
      if (open->transfers.empty() || open->transfers.back().dst != e.peer) {
        open->transfers.push_back(Transfer{e.peer, {}, {}, 0});
      }
      Transfer& t = open->transfers.back();
      t.event_indices.push_back(i);
      t.chunks.push_back(e.chunk);
      t.bytes += s.chunks[e.chunk].length_bytes;
      if (e.group == 0) open = nullptr;
    }
    total_batches += ranks[r].batches.size();
  }

  const double prologue = prologue_seconds(s, p);
  ranks[static_cast<std::size_t>(s.root)].out_free_s = prologue;
  ranks[static_cast<std::size_t>(s.root)].completion_s = prologue;

  SimResult result;

  // Each pass picks the startable batch with the least start time, breaking
  // ties by rank, so identical inputs replay identically.
  std::size_t executed = 0;
  while (executed < total_batches) {
    double best_start = kNotOwned;
    std::size_t best_rank = n;
    for (std::size_t r = 0; r < n; ++r) {
      RankState& rs = ranks[r];
      if (rs.batch_cursor >= rs.batches.size()) continue;
      const Batch& b = rs.batches[rs.batch_cursor];
      double start = rs.out_free_s;
      bool ready = true;
      // A transfer is matchable only when its receiver's next receives are
      // exactly this transfer's chunks, in order.
      std::vector<std::pair<std::size_t, std::size_t>> probe;  // dst, cursor
      for (const Transfer& t : b.transfers) {
        const auto dst = static_cast<std::size_t>(t.dst);
        std::size_t cursor = ranks[dst].recv_cursor;
        for (const auto& [d, c] : probe) {
          if (d == dst) cursor = c;
        }
        if (cursor + t.chunks.size() > ranks[dst].recvs.size()) {
          ready = false;
          break;
        }
        for (std::size_t k = 0; k < t.chunks.size(); ++k) {
          const PendingRecv& pr = ranks[dst].recvs[cursor + k];
          if (pr.src != static_cast<int>(r) || pr.chunk != t.chunks[k]) {
            ready = false;
            break;
          }
        }
        if (!ready) break;
        bool found = false;
        for (auto& [d, c] : probe) {
          if (d == dst) {
            c = cursor + t.chunks.size();
            found = true;
          }
        }
        if (!found) probe.emplace_back(dst, cursor + t.chunks.size());
        start = std::max(start, ranks[dst].last_recv_end_s);
        for (std::uint32_t chunk : t.chunks) {
          start = std::max(start, owned_at[r][chunk]);
        }
      }
      if (!ready || start == kNotOwned) continue;
      if (start < best_start ||
          (start == best_start && r < best_rank)) {
        best_start = start;
        best_rank = r;
      }
    }
    if (best_rank == n) {
      throw std::runtime_error(
          "schedule stalled: receive orders admit no matching transfer");
    }

    RankState& sender = ranks[best_rank];
    const Batch& batch = sender.batches[sender.batch_cursor];
    double batch_end = best_start;
    for (const Transfer& t : batch.transfers) {
      const auto dst = static_cast<std::size_t>(t.dst);
      const double end = best_start + p.startup_s +
                         static_cast<double>(t.bytes) / p.link_bandwidth_Bps;
      batch_end = std::max(batch_end, end);
      for (std::size_t k = 0; k < t.chunks.size(); ++k) {
        owned_at[dst][t.chunks[k]] =
            std::min(owned_at[dst][t.chunks[k]], end);
        const PendingRecv& pr = ranks[dst].recvs[ranks[dst].recv_cursor + k];
        if (options.record_trace) {
          result.per_event_times.push_back(SimEventRecord{
              static_cast<int>(best_rank), t.event_indices[k],
              Event::Kind::Send, t.dst, t.chunks[k], best_start, end});
          result.per_event_times.push_back(SimEventRecord{
              t.dst, pr.event_index, Event::Kind::Recv,
              static_cast<int>(best_rank), pr.chunk, best_start, end});
        }
      }
      ranks[dst].recv_cursor += t.chunks.size();
      ranks[dst].last_recv_end_s = end;
      ranks[dst].completion_s = std::max(ranks[dst].completion_s, end);
    }
    sender.out_free_s = batch_end;
    sender.completion_s = std::max(sender.completion_s, batch_end);
    ++sender.batch_cursor;
    ++executed;
  }

  result.completion_s.resize(n);
  bool coverage = true;
  for (std::size_t r = 0; r < n; ++r) {
    result.completion_s[r] = ranks[r].completion_s;
    if (ranks[r].recv_cursor != ranks[r].recvs.size()) coverage = false;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      if (owned_at[r][c] == kNotOwned) coverage = false;
    }
  }
  result.coverage_ok = coverage;

  if (options.record_trace) {
    std::sort(result.per_event_times.begin(), result.per_event_times.end(),
              [](const SimEventRecord& a, const SimEventRecord& b) {
                if (a.start_s != b.start_s) return a.start_s < b.start_s;
                if (a.rank != b.rank) return a.rank < b.rank;
                return a.event_index < b.event_index;
              });
  }
  return result;
}

bool verify_coverage(const Schedule& s) {
  if (s.n_ranks < 1 ||
      s.per_rank_ops.size() != static_cast<std::size_t>(s.n_ranks) ||
      s.root < 0 || s.root >= s.n_ranks) {
    return false;
  }
  const auto n = static_cast<std::size_t>(s.n_ranks);
  const std::size_t n_chunks = s.chunks.size();

  std::vector<std::vector<bool>> owned(n,
                                       std::vector<bool>(n_chunks, false));
  for (std::size_t c = 0; c < n_chunks; ++c) {
    owned[static_cast<std::size_t>(s.root)][c] = true;
  }
  std::vector<std::size_t> cursor(n, 0);
  // (src, dst, chunk) messages posted but not yet consumed.
  const auto key_of = [&](std::size_t src, std::size_t dst,
                          std::uint32_t chunk) {
    return (src * n + dst) * n_chunks + chunk;
  };
  std::unordered_map<std::uint64_t, std::int64_t> in_flight;
  in_flight.reserve(64);

  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t r = 0; r < n; ++r) {
      while (cursor[r] < s.per_rank_ops[r].size()) {
        const Event& e = s.per_rank_ops[r][cursor[r]];
        if (e.chunk >= n_chunks || e.peer < 0 || e.peer >= s.n_ranks) {
          return false;
        }
        const auto peer = static_cast<std::size_t>(e.peer);
        if (e.kind == Event::Kind::Send) {
          if (!owned[r][e.chunk]) break;
          ++in_flight[key_of(r, peer, e.chunk)];
        } else {
          const auto it = in_flight.find(key_of(peer, r, e.chunk));
          if (it == in_flight.end() || it->second == 0) break;
          --it->second;
          owned[r][e.chunk] = true;
        }
        ++cursor[r];
        progress = true;
      }
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      if (!owned[r][c]) return false;
    }
  }
  return true;
}

void write_trace_csv(const SimResult& result, std::ostream& out) {
  out << "rank,event_index,kind,peer,chunk,start_s,end_s\n";
  char line[160];
  for (const SimEventRecord& rec : result.per_event_times) {
    std::snprintf(line, sizeof line, "%d,%zu,%s,%d,%u,%.17g,%.17g\n", rec.rank,
                  rec.event_index,
                  rec.kind == Event::Kind::Send ? "send" : "recv", rec.peer,
                  rec.chunk, rec.start_s, rec.end_s);
    out << line;
  }
}

}  // namespace bcastlab
