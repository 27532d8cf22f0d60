// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>

#include "bcastlab/runtime.hpp"

namespace bcastlab {

namespace {

struct Message {
  std::uint32_t chunk_id{};
  std::vector<std::uint8_t> payload;
};

// One FIFO per ordered (src, dst) pair keeps per-pair delivery ordered while
// leaving unrelated pairs free to progress.
struct Channel {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Message> queue;
};

class InProcFabric;

class InProcEndpoint final : public Transport {
 public:
  InProcEndpoint(InProcFabric& fabric, int rank)
      : fabric_(fabric), rank_(rank) {}

  void send(int dst_rank, std::uint32_t chunk_id,
            std::span<const std::uint8_t> data) override;
  std::vector<std::uint8_t> recv(int src_rank,
                                 std::uint32_t chunk_id) override;

 private:
  InProcFabric& fabric_;
  int rank_;
};

class InProcFabric final : public TransportFabric {
 public:
  explicit InProcFabric(int n) : n_(n) {
    if (n < 1) {
      throw std::invalid_argument("rank count must be >= 1");
    }
    channels_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (auto& c : channels_) c = std::make_unique<Channel>();
    for (int rank = 0; rank < n; ++rank) {
      endpoints_.push_back(std::make_unique<InProcEndpoint>(*this, rank));
    }
  }

  int n_ranks() const override { return n_; }

  Transport& endpoint(int rank) override {
    return *endpoints_.at(static_cast<std::size_t>(rank));
  }

  Channel& channel(int src, int dst) {
    if (src < 0 || src >= n_ || dst < 0 || dst >= n_) {
      throw std::invalid_argument("rank out of range");
    }
    return *channels_[static_cast<std::size_t>(src) *
                          static_cast<std::size_t>(n_) +
                      static_cast<std::size_t>(dst)];
  }

 private:
  int n_;
  std::vector<std::unique_ptr<Channel>> channels_;
  std::vector<std::unique_ptr<InProcEndpoint>> endpoints_;
};

void InProcEndpoint::send(int dst_rank, std::uint32_t chunk_id,
                          std::span<const std::uint8_t> data) {
  Channel& ch = fabric_.channel(rank_, dst_rank);
  {
    std::lock_guard lock(ch.mutex);
    ch.queue.push_back(
        Message{chunk_id, std::vector<std::uint8_t>(data.begin(), data.end())});
  }
  ch.ready.notify_one();
}

std::vector<std::uint8_t> InProcEndpoint::recv(int src_rank,
                                               std::uint32_t chunk_id) {
  Channel& ch = fabric_.channel(src_rank, rank_);
  std::unique_lock lock(ch.mutex);
  ch.ready.wait(lock, [&] { return !ch.queue.empty(); });
  Message msg = std::move(ch.queue.front());
  ch.queue.pop_front();
  lock.unlock();
  if (msg.chunk_id != chunk_id) {
    throw std::runtime_error(
        "out-of-order delivery: expected chunk " + std::to_string(chunk_id) +
        " from rank " + std::to_string(src_rank) + ", got chunk " +
        std::to_string(msg.chunk_id));
  }
  return std::move(msg.payload);
}

}  // namespace

std::unique_ptr<TransportFabric> make_inproc_fabric(int n) {
  return std::make_unique<InProcFabric>(n);
}

}  // namespace bcastlab
