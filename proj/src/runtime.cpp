// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/runtime.hpp"

#include <barrier>
#include <chrono>
#include <cstring>
#include <sstream>

#include "bcastlab/schedules.hpp"

namespace bcastlab {

namespace detail {

std::string format_rank_failures(const std::vector<RankFailure>& failures) {
  std::ostringstream out;
  out << failures.size() << " rank(s) failed:";
  for (const RankFailure& f : failures) {
    out << " [rank " << f.rank << ": " << f.message << "]";
  }
  return out.str();
}

}  // namespace detail

AggregateRankError::AggregateRankError(std::vector<RankFailure> failures)
    : std::runtime_error(detail::format_rank_failures(failures)),
      failures_(std::move(failures)) {}

void execute_rank(const Schedule& schedule, int rank,
                  std::span<std::uint8_t> buffer, Transport& transport) {
  if (buffer.size() != schedule.message_bytes) {
    throw std::invalid_argument("buffer length does not match the message");
  }
  if (rank == schedule.root &&
      schedule.prologue == RootPrologue::HostStaging) {
    // Stand-in for the device-to-host copy: ordering is preserved, timing
    // realism is not a goal here.
    [[maybe_unused]] std::vector<std::uint8_t> staging(buffer.begin(),
                                                       buffer.end());
  }
  for (const Event& e : schedule.per_rank_ops[static_cast<std::size_t>(rank)]) {
    const ChunkSpec& chunk = schedule.chunks[e.chunk];
    if (e.kind == Event::Kind::Send) {
      transport.send(e.peer, e.chunk,
                     buffer.subspan(chunk.offset_bytes, chunk.length_bytes));
    } else {
      const auto data = transport.recv(e.peer, e.chunk);
      if (data.size() != chunk.length_bytes) {
        throw std::runtime_error("chunk " + std::to_string(e.chunk) +
                                 " arrived with " +
                                 std::to_string(data.size()) + " bytes, " +
                                 std::to_string(chunk.length_bytes) +
                                 " expected");
      }
      if (!data.empty()) {
        std::memcpy(buffer.data() + chunk.offset_bytes, data.data(),
                    data.size());
      }
    }
  }
}

BcastResult run_bcast(const BcastRequest& request, TransportFabric& fabric) {
  if (request.n < 1) {
    throw std::invalid_argument("rank count must be >= 1");
  }
  if (request.buffers.size() != static_cast<std::size_t>(request.n)) {
    throw std::invalid_argument("one buffer per rank required");
  }
  for (const auto& buffer : request.buffers) {
    if (buffer.size() != request.buffers.front().size()) {
      throw std::invalid_argument("buffer lengths differ across ranks");
    }
  }
  if (fabric.n_ranks() < request.n) {
    throw std::invalid_argument("fabric has too few ranks");
  }

  const Schedule schedule =
      make_schedule(request.config, request.n, request.root,
                    request.buffers.front().size());

  using Clock = std::chrono::steady_clock;
  std::barrier sync(request.n);
  std::vector<Clock::time_point> finish(static_cast<std::size_t>(request.n));
  Clock::time_point start{};

  launch_ranks(request.n, [&](int rank) {
    sync.arrive_and_wait();
    if (rank == request.root) start = Clock::now();
    execute_rank(schedule, rank,
                 request.buffers[static_cast<std::size_t>(rank)],
                 fabric.endpoint(rank));
    finish[static_cast<std::size_t>(rank)] = Clock::now();
  });

  Clock::time_point last = start;
  for (const auto& t : finish) last = std::max(last, t);
  return BcastResult{std::chrono::duration<double>(last - start).count()};
}

}  // namespace bcastlab
