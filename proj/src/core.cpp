// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/core.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace bcastlab {

namespace {

constexpr std::array<std::string_view, kAlgorithmCount> kAlgorithmNames = {
    "direct",         "chain",           "knomial",
    "scatter_ring_allgather", "chain_pipelined", "knomial_staged",
};

}  // namespace

void NetworkParams::validate() const {
  if (startup_s < 0.0) {
    throw std::invalid_argument("startup_s must be >= 0");
  }
  if (!(link_bandwidth_Bps > 0.0)) {
    throw std::invalid_argument("link_bandwidth_Bps must be > 0");
  }
  if (!(staging_bandwidth_Bps > 0.0)) {
    throw std::invalid_argument("staging_bandwidth_Bps must be > 0");
  }
}

std::string_view algorithm_name(Algorithm algo) {
  return kAlgorithmNames.at(static_cast<std::size_t>(algo));
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  for (int i = 0; i < kAlgorithmCount; ++i) {
    if (kAlgorithmNames[static_cast<std::size_t>(i)] == name) {
      return static_cast<Algorithm>(i);
    }
  }
  return std::nullopt;
}

bool algorithm_uses_radix(Algorithm algo) {
  return algo == Algorithm::Knomial || algo == Algorithm::KnomialStaged;
}

bool algorithm_uses_chunk(Algorithm algo) {
  return algo == Algorithm::ChainPipelined;
}

void AlgorithmConfig::validate() const {
  if (algorithm_uses_radix(algorithm) && radix_k < 2) {
    throw std::invalid_argument("radix_k must be >= 2 for " +
                                std::string(algorithm_name(algorithm)));
  }
  if (algorithm_uses_chunk(algorithm) && chunk_bytes == 0) {
    throw std::invalid_argument("chunk_bytes must be >= 1 for " +
                                std::string(algorithm_name(algorithm)));
  }
}

std::vector<ChunkSpec> make_chunks(std::uint64_t message_bytes,
                                   std::uint64_t chunk_bytes) {
  if (chunk_bytes == 0) {
    throw std::invalid_argument("chunk_bytes must be >= 1");
  }
  if (message_bytes == 0) {
    return {ChunkSpec{0, 0, 0}};
  }
  const std::uint64_t count = (message_bytes + chunk_bytes - 1) / chunk_bytes;
  std::vector<ChunkSpec> chunks;
  chunks.reserve(count);
  std::uint64_t offset = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = std::min(chunk_bytes, message_bytes - offset);
    chunks.push_back(ChunkSpec{static_cast<std::uint32_t>(i), offset, len});
    offset += len;
  }
  return chunks;
}

namespace {

ScheduleViolation violation(int rank, std::size_t event_index,
                            std::string description) {
  return ScheduleViolation{rank, event_index, std::move(description)};
}

}  // namespace

std::optional<ScheduleViolation> validate_schedule(const Schedule& s) {
  if (s.n_ranks < 1) {
    return violation(-1, 0, "n_ranks must be >= 1");
  }
  if (s.root < 0 || s.root >= s.n_ranks) {
    return violation(-1, 0, "root out of range");
  }
  if (s.per_rank_ops.size() != static_cast<std::size_t>(s.n_ranks)) {
    return violation(-1, 0, "per_rank_ops size does not match n_ranks");
  }
  if (s.chunks.empty()) {
    return violation(-1, 0, "schedule has no chunks");
  }
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < s.chunks.size(); ++i) {
    const ChunkSpec& c = s.chunks[i];
    if (c.chunk_id != i) {
      return violation(-1, 0, "chunk ids must be dense and ordered");
    }
    if (c.offset_bytes != offset) {
      return violation(-1, 0, "chunks must be contiguous from offset 0");
    }
    if (i + 1 < s.chunks.size() &&
        c.length_bytes != s.chunks[0].length_bytes && s.chunks.size() > 1) {
      // Uneven interior chunks are allowed only for the near-equal partition
      // split (lengths differing by at most one byte).
      if (c.length_bytes + 1 != s.chunks[0].length_bytes) {
        return violation(-1, 0, "interior chunks must have equal length");
      }
    }
    offset += c.length_bytes;
  }
  if (offset != s.message_bytes) {
    return violation(-1, 0, "chunk lengths do not cover the message");
  }

  const std::size_t n_chunks = s.chunks.size();

  // Structural checks and the root-never-receives rule.
  for (int rank = 0; rank < s.n_ranks; ++rank) {
    const auto& ops = s.per_rank_ops[static_cast<std::size_t>(rank)];
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Event& e = ops[i];
      if (e.peer < 0 || e.peer >= s.n_ranks) {
        return violation(rank, i, "peer out of range");
      }
      if (e.peer == rank) {
        return violation(rank, i, "rank communicates with itself");
      }
      if (e.chunk >= n_chunks) {
        return violation(rank, i, "chunk id out of range");
      }
      if (rank == s.root && e.kind == Event::Kind::Recv) {
        return violation(rank, i, "root must not receive");
      }
    }
  }

  // Every non-root rank receives every chunk exactly once.
  for (int rank = 0; rank < s.n_ranks; ++rank) {
    if (rank == s.root) continue;
    std::vector<std::size_t> recv_count(n_chunks, 0);
    const auto& ops = s.per_rank_ops[static_cast<std::size_t>(rank)];
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (ops[i].kind == Event::Kind::Recv) {
        if (++recv_count[ops[i].chunk] > 1) {
          return violation(rank, i, "chunk received more than once");
        }
      }
    }
    for (std::size_t c = 0; c < n_chunks; ++c) {
      if (recv_count[c] != 1) {
        return violation(rank, ops.size(),
                         "chunk " + std::to_string(c) + " never received");
      }
    }
  }

  // Store and forward: a chunk may be sent only once owned.
  for (int rank = 0; rank < s.n_ranks; ++rank) {
    std::vector<bool> owned(n_chunks, rank == s.root);
    const auto& ops = s.per_rank_ops[static_cast<std::size_t>(rank)];
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Event& e = ops[i];
      if (e.kind == Event::Kind::Recv) {
        owned[e.chunk] = true;
      } else if (!owned[e.chunk]) {
        return violation(rank, i, "chunk sent before it is owned");
      }
    }
  }

  // Sends and receives pair up one to one.
  const auto key_of = [&s, n_chunks](int src, int dst, std::uint32_t chunk) {
    return (static_cast<std::uint64_t>(src) *
                static_cast<std::uint64_t>(s.n_ranks) +
            static_cast<std::uint64_t>(dst)) *
               n_chunks +
           chunk;
  };
  std::unordered_map<std::uint64_t, std::int64_t> balance;
  balance.reserve(64);
  for (int rank = 0; rank < s.n_ranks; ++rank) {
    for (const Event& e : s.per_rank_ops[static_cast<std::size_t>(rank)]) {
      if (e.kind == Event::Kind::Send) {
        ++balance[key_of(rank, e.peer, e.chunk)];
      } else {
        --balance[key_of(e.peer, rank, e.chunk)];
      }
    }
  }
  bool balanced = true;
  for (const auto& [key, count] : balance) {
    if (count != 0) balanced = false;
  }
  if (!balanced) {
    for (int rank = 0; rank < s.n_ranks; ++rank) {
      const auto& ops = s.per_rank_ops[static_cast<std::size_t>(rank)];
      for (std::size_t i = 0; i < ops.size(); ++i) {
        const Event& e = ops[i];
        const std::uint64_t key = e.kind == Event::Kind::Send
                                      ? key_of(rank, e.peer, e.chunk)
                                      : key_of(e.peer, rank, e.chunk);
        const auto it = balance.find(key);
        if (it != balance.end() && it->second != 0) {
          return violation(rank, i,
                           it->second > 0 ? "send without matching receive"
                                          : "receive without matching send");
        }
      }
    }
  }

  return std::nullopt;
}

std::string to_text(const Schedule& s) {
  std::ostringstream out;
  for (int rank = 0; rank < s.n_ranks; ++rank) {
    for (const Event& e : s.per_rank_ops[static_cast<std::size_t>(rank)]) {
      out << rank << ' '
          << (e.kind == Event::Kind::Send ? "send" : "recv") << ' ' << e.peer
          << ' ' << e.chunk << '\n';
    }
  }
  return out.str();
}

int ceil_log(int base, std::int64_t n) {
  if (base < 2) {
    throw std::invalid_argument("ceil_log base must be >= 2");
  }
  if (n < 1) {
    throw std::invalid_argument("ceil_log argument must be >= 1");
  }
  int steps = 0;
  std::int64_t reach = 1;
  while (reach < n) {
    reach *= base;
    ++steps;
  }
  return steps;
}

}  // namespace bcastlab
