// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/schedules.hpp"

#include <deque>
#include <stdexcept>
#include <utility>

namespace bcastlab {

namespace {

void require_root(int n, int root) {
  if (n < 1) {
    throw std::invalid_argument("rank count must be >= 1");
  }
  if (root < 0 || root >= n) {
    throw std::invalid_argument("root out of range");
  }
}

// Event lists are built in logical-rank space; this relabels them in place.
Schedule rotate_to_root(int n, int root, std::uint64_t message_bytes,
                        std::vector<ChunkSpec> chunks,
                        std::vector<std::vector<Event>> logical_ops,
                        RootPrologue prologue = RootPrologue::None) {
  Schedule s;
  s.n_ranks = n;
  s.root = root;
  s.message_bytes = message_bytes;
  s.prologue = prologue;
  s.chunks = std::move(chunks);
  s.per_rank_ops.resize(static_cast<std::size_t>(n));
  for (int logical = 0; logical < n; ++logical) {
    const int actual = (logical + root) % n;
    auto& ops = logical_ops[static_cast<std::size_t>(logical)];
    for (Event& e : ops) {
      e.peer = (e.peer + root) % n;
    }
    s.per_rank_ops[static_cast<std::size_t>(actual)] = std::move(ops);
  }
  return s;
}

std::vector<ChunkSpec> whole_message_chunk(std::uint64_t message_bytes) {
  return make_chunks(message_bytes,
                     message_bytes > 0 ? message_bytes : std::uint64_t{1});
}

// Near-equal split into n partitions: the first (M mod n) partitions are one
// byte longer. Partition i is pinned to logical rank i by the scatter.
std::vector<ChunkSpec> partition_chunks(int n, std::uint64_t message_bytes) {
  const auto count = static_cast<std::uint64_t>(n);
  const std::uint64_t base = message_bytes / count;
  const std::uint64_t remainder = message_bytes % count;
  std::vector<ChunkSpec> chunks;
  chunks.reserve(count);
  std::uint64_t offset = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = base + (i < remainder ? 1 : 0);
    chunks.push_back(ChunkSpec{static_cast<std::uint32_t>(i), offset, len});
    offset += len;
  }
  return chunks;
}

// Logical-rank knomial tree. A rank's lowest nonzero base-k digit at
// position j identifies its parent (that digit cleared) and its receive
// round ceil(log_k n) - j; afterwards it fans out to children at every
// lower digit position, largest subtree first. Sends of one round form one
// concurrency group when the round has more than one child.
std::vector<std::vector<Event>> knomial_logical_ops(int n, int radix_k) {
  const int rounds = ceil_log(radix_k, n);
  std::vector<std::vector<Event>> ops(static_cast<std::size_t>(n));
  std::vector<std::uint32_t> next_group(static_cast<std::size_t>(n), 1);
  for (int rank = 0; rank < n; ++rank) {
    int top_position = rounds;  // root fans out over every position
    if (rank != 0) {
      std::int64_t power = 1;
      int position = 0;
      while (rank % (power * radix_k) == 0) {
        power *= radix_k;
        ++position;
      }
      const int digit = static_cast<int>((rank / power) % radix_k);
      const int parent = rank - digit * static_cast<int>(power);
      ops[static_cast<std::size_t>(rank)].push_back(
          recv_from(parent, 0));
      top_position = position;
    }
    for (int position = top_position - 1; position >= 0; --position) {
      std::int64_t power = 1;
      for (int i = 0; i < position; ++i) power *= radix_k;
      std::vector<int> children;
      for (int digit = 1; digit < radix_k; ++digit) {
        const std::int64_t child = rank + digit * power;
        if (child < n) children.push_back(static_cast<int>(child));
      }
      if (children.empty()) continue;
      const std::uint32_t group =
          children.size() > 1 ? next_group[static_cast<std::size_t>(rank)]++
                              : 0;
      for (int child : children) {
        ops[static_cast<std::size_t>(rank)].push_back(
            send_to(child, 0, group));
      }
    }
  }
  return ops;
}

}  // namespace

Schedule schedule_direct(int n, int root, std::uint64_t message_bytes) {
  require_root(n, root);
  std::vector<std::vector<Event>> ops(static_cast<std::size_t>(n));
  for (int rank = 1; rank < n; ++rank) {
    ops[0].push_back(send_to(rank, 0));
    ops[static_cast<std::size_t>(rank)].push_back(recv_from(0, 0));
  }
  return rotate_to_root(n, root, message_bytes,
                        whole_message_chunk(message_bytes), std::move(ops),
                        RootPrologue::SelfSend);
}

Schedule schedule_chain(int n, int root, std::uint64_t message_bytes) {
  require_root(n, root);
  std::vector<std::vector<Event>> ops(static_cast<std::size_t>(n));
  for (int rank = 0; rank + 1 < n; ++rank) {
    ops[static_cast<std::size_t>(rank)].push_back(send_to(rank + 1, 0));
    ops[static_cast<std::size_t>(rank + 1)].push_back(recv_from(rank, 0));
  }
  return rotate_to_root(n, root, message_bytes,
                        whole_message_chunk(message_bytes), std::move(ops));
}

Schedule schedule_knomial(int n, int radix_k, int root,
                          std::uint64_t message_bytes) {
  require_root(n, root);
  if (radix_k < 2) {
    throw std::invalid_argument("radix must be >= 2");
  }
  return rotate_to_root(n, root, message_bytes,
                        whole_message_chunk(message_bytes),
                        knomial_logical_ops(n, radix_k));
}

Schedule schedule_knomial_staged(int n, int radix_k, int root,
                                 std::uint64_t message_bytes) {
  require_root(n, root);
  if (radix_k < 2) {
    throw std::invalid_argument("radix must be >= 2");
  }
  return rotate_to_root(n, root, message_bytes,
                        whole_message_chunk(message_bytes),
                        knomial_logical_ops(n, radix_k),
                        RootPrologue::HostStaging);
}

Schedule schedule_chain_pipelined(int n, int root, std::uint64_t message_bytes,
                                  std::uint64_t chunk_bytes) {
  require_root(n, root);
  if (n < 2) {
    throw std::invalid_argument("pipelined chain needs at least 2 ranks");
  }
  auto chunks = make_chunks(message_bytes, chunk_bytes);
  std::vector<std::vector<Event>> ops(static_cast<std::size_t>(n));
  for (std::uint32_t c = 0; c < chunks.size(); ++c) {
    ops[0].push_back(send_to(1, c));
  }
  for (int rank = 1; rank + 1 < n; ++rank) {
    auto& list = ops[static_cast<std::size_t>(rank)];
    for (std::uint32_t c = 0; c < chunks.size(); ++c) {
      list.push_back(recv_from(rank - 1, c));
      list.push_back(send_to(rank + 1, c));
    }
  }
  if (n >= 2) {
    auto& last = ops[static_cast<std::size_t>(n - 1)];
    for (std::uint32_t c = 0; c < chunks.size(); ++c) {
      last.push_back(recv_from(n - 2, c));
    }
  }
  return rotate_to_root(n, root, message_bytes, std::move(chunks),
                        std::move(ops));
}

Schedule schedule_scatter_ring_allgather(int n, int root,
                                         std::uint64_t message_bytes) {
  require_root(n, root);
  auto chunks = partition_chunks(n, message_bytes);
  std::vector<std::vector<Event>> ops(static_cast<std::size_t>(n));
  std::vector<std::uint32_t> next_group(static_cast<std::size_t>(n), 1);

  // Which partitions each rank obtains during the scatter; the ring skips
  // these so that every chunk is received exactly once per rank.
  std::vector<std::vector<bool>> has(static_cast<std::size_t>(n),
                                     std::vector<bool>(chunks.size(), false));
  for (std::size_t c = 0; c < chunks.size(); ++c) has[0][c] = true;

  // Range-halving binomial scatter: the holder of [lo, hi) hands the upper
  // part off to its midpoint, repeatedly. A multi-partition hand-off is one
  // grouped transfer (single startup on the wire).
  std::deque<std::pair<int, int>> ranges;
  ranges.emplace_back(0, n);
  while (!ranges.empty()) {
    auto [lo, hi] = ranges.front();
    ranges.pop_front();
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo + 1) / 2;
      const std::uint32_t group =
          hi - mid > 1 ? next_group[static_cast<std::size_t>(lo)]++ : 0;
      for (int c = mid; c < hi; ++c) {
        ops[static_cast<std::size_t>(lo)].push_back(
            send_to(mid, static_cast<std::uint32_t>(c), group));
        ops[static_cast<std::size_t>(mid)].push_back(
            recv_from(lo, static_cast<std::uint32_t>(c)));
        has[static_cast<std::size_t>(mid)][static_cast<std::size_t>(c)] = true;
      }
      ranges.emplace_back(mid, hi);
      hi = mid;
    }
  }

  // Ring allgather: at step s, logical rank i forwards the partition it
  // obtained at step s-1 (its own partition first) to rank i+1. Transfers
  // into the root and re-deliveries of scatter-held partitions are omitted.
  for (int step = 1; step < n; ++step) {
    for (int rank = 0; rank < n; ++rank) {
      const int dst = (rank + 1) % n;
      const auto part = static_cast<std::uint32_t>(
          ((rank - step + 1) % n + n) % n);
      if (dst == 0 || has[static_cast<std::size_t>(dst)][part]) continue;
      ops[static_cast<std::size_t>(rank)].push_back(send_to(dst, part));
      ops[static_cast<std::size_t>(dst)].push_back(recv_from(rank, part));
    }
  }

  return rotate_to_root(n, root, message_bytes, std::move(chunks),
                        std::move(ops));
}

Schedule make_schedule(const AlgorithmConfig& config, int n, int root,
                       std::uint64_t message_bytes) {
  config.validate();
  switch (config.algorithm) {
    case Algorithm::Direct:
      return schedule_direct(n, root, message_bytes);
    case Algorithm::Chain:
      return schedule_chain(n, root, message_bytes);
    case Algorithm::Knomial:
      return schedule_knomial(n, config.radix_k, root, message_bytes);
    case Algorithm::ScatterRingAllgather:
      return schedule_scatter_ring_allgather(n, root, message_bytes);
    case Algorithm::ChainPipelined:
      return schedule_chain_pipelined(n, root, message_bytes,
                                      config.chunk_bytes);
    case Algorithm::KnomialStaged:
      return schedule_knomial_staged(n, config.radix_k, root, message_bytes);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace bcastlab
