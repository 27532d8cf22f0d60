// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "bcastlab/core.hpp"

namespace bcastlab {

/// One rank's endpoint into the message fabric. Delivery is ordered and
/// reliable per (src, dst) pair; recv blocks until the matching send arrives.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void send(int dst_rank, std::uint32_t chunk_id,
                    std::span<const std::uint8_t> data) = 0;
  virtual std::vector<std::uint8_t> recv(int src_rank,
                                         std::uint32_t chunk_id) = 0;
};

/// Owns the endpoints connecting n ranks.
class TransportFabric {
 public:
  virtual ~TransportFabric() = default;

  virtual int n_ranks() const = 0;
  virtual Transport& endpoint(int rank) = 0;
};

/// Mutex-and-condvar message queues, one per ordered rank pair.
std::unique_ptr<TransportFabric> make_inproc_fabric(int n);

/// Loopback TCP byte streams, one connection per ordered rank pair. Each
/// rank listens on base_port + rank; base_port 0 picks free ports. Frames
/// are a 16-byte little-endian header (src, dst, chunk_id, payload_len as
/// u32) followed by the payload.
std::unique_ptr<TransportFabric> make_socket_fabric(
    int n, std::uint16_t base_port = 0);

struct RankFailure {
  int rank{};
  std::string message;
};

class AggregateRankError : public std::runtime_error {
 public:
  explicit AggregateRankError(std::vector<RankFailure> failures);
  const std::vector<RankFailure>& failures() const { return failures_; }

 private:
  std::vector<RankFailure> failures_;
};

namespace detail {
std::string format_rank_failures(const std::vector<RankFailure>& failures);
}

/// Runs body(rank) on n joined threads. Any rank's exception is collected
/// and rethrown as an AggregateRankError naming the failing ranks. When the
/// body returns a value, the joined results come back indexed by rank.
template <typename F>
auto launch_ranks(int n, F&& body) {
  using Result = std::invoke_result_t<F&, int>;
  if (n < 1) {
    throw std::invalid_argument("rank count must be >= 1");
  }
  constexpr bool kVoid = std::is_void_v<Result>;
  struct Slot {
    std::conditional_t<kVoid, char, std::optional<Result>> value{};
    bool failed{false};
    RankFailure failure{};
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n));
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int rank = 0; rank < n; ++rank) {
      Slot& slot = slots[static_cast<std::size_t>(rank)];
      threads.emplace_back([&body, &slot, rank] {
        try {
          if constexpr (kVoid) {
            body(rank);
          } else {
            slot.value = body(rank);
          }
        } catch (const std::exception& e) {
          slot.failed = true;
          slot.failure = RankFailure{rank, e.what()};
        } catch (...) {
          slot.failed = true;
          slot.failure = RankFailure{rank, "unknown error"};
        }
      });
    }
  }
  std::vector<RankFailure> collected;
  for (Slot& slot : slots) {
    if (slot.failed) collected.push_back(std::move(slot.failure));
  }
  if (!collected.empty()) {
    throw AggregateRankError(std::move(collected));
  }
  if constexpr (!kVoid) {
    std::vector<Result> results;
    results.reserve(static_cast<std::size_t>(n));
    for (Slot& slot : slots) results.push_back(std::move(*slot.value));
    return results;
  }
}

struct BcastRequest {
  int n{};
  int root{};
  // One buffer per rank, all the same length; the root's holds the payload.
  std::vector<std::span<std::uint8_t>> buffers;
  AlgorithmConfig config{};
};

struct BcastResult {
  double wall_s{};
};

/// Runs one event list on a live transport: sends read from the buffer at
/// chunk offsets, receives land at them. The host-staging prologue becomes a
/// local copy at the root.
void execute_rank(const Schedule& schedule, int rank,
                  std::span<std::uint8_t> buffer, Transport& transport);

/// Executes the schedule implied by the request across n rank threads.
/// Wall time runs from a barrier-synchronized start at the root to the last
/// rank's completion.
BcastResult run_bcast(const BcastRequest& request, TransportFabric& fabric);

}  // namespace bcastlab
