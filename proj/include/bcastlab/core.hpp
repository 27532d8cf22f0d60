// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcastlab {

/// Parameters of the modeled interconnect: per-transfer startup time,
/// link bandwidth, and the host staging bandwidth used by staged designs.
struct NetworkParams {
  double startup_s{1e-6};
  double link_bandwidth_Bps{1e9};
  double staging_bandwidth_Bps{1e10};

  // Throws std::invalid_argument on nonpositive bandwidths or negative startup.
  void validate() const;

  bool operator==(const NetworkParams&) const = default;
};

enum class Algorithm : int {
  Direct = 0,
  Chain,
  Knomial,
  ScatterRingAllgather,
  ChainPipelined,
  KnomialStaged,
};

inline constexpr int kAlgorithmCount = 6;

std::string_view algorithm_name(Algorithm algo);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

bool algorithm_uses_radix(Algorithm algo);
bool algorithm_uses_chunk(Algorithm algo);

/// An algorithm together with its free parameters. Unused parameters stay 0.
struct AlgorithmConfig {
  Algorithm algorithm{Algorithm::Chain};
  int radix_k{0};
  std::uint64_t chunk_bytes{0};

  void validate() const;

  bool operator==(const AlgorithmConfig&) const = default;
};

/// One contiguous fragment of the broadcast message.
struct ChunkSpec {
  std::uint32_t chunk_id{};
  std::uint64_t offset_bytes{};
  std::uint64_t length_bytes{};

  bool operator==(const ChunkSpec&) const = default;
};

/// A single communication step of one rank, at chunk granularity.
///
/// Events of one rank are totally ordered. Send events sharing a nonzero
/// `group` with their immediate neighbors form one batch that starts as a
/// unit: runs to the same peer merge into a single wire transfer (one
/// startup, summed bytes), runs to distinct peers proceed in parallel on
/// logical subports. group 0 means plain one-at-a-time transfers.
struct Event {
  enum class Kind : std::uint8_t { Send, Recv };

  Kind kind{Kind::Send};
  int peer{};
  std::uint32_t chunk{};
  std::uint32_t group{0};

  bool operator==(const Event&) const = default;
};

inline Event send_to(int peer, std::uint32_t chunk, std::uint32_t group = 0) {
  return Event{Event::Kind::Send, peer, chunk, group};
}
inline Event recv_from(int peer, std::uint32_t chunk) {
  return Event{Event::Kind::Recv, peer, chunk, 0};
}

/// Work the root performs before its first send.
enum class RootPrologue : std::uint8_t {
  None,
  // One local full-message step billed like a link transfer; makes the
  // direct algorithm cost n (not n-1) transfer times.
  SelfSend,
  // Device-to-host copy billed at the staging bandwidth.
  HostStaging,
};

/// The executable form of a broadcast: per-rank ordered send/receive events
/// over a fixed chunking of the message.
///
/// Invariants (checked by validate_schedule):
///   - the root has no Recv events,
///   - every non-root rank receives every chunk exactly once,
///   - a rank sends a chunk only after owning it (root owns all chunks
///     up front, others own a chunk once received) -- store and forward,
///   - Send and Recv events pair up one to one across ranks.
struct Schedule {
  int n_ranks{};
  int root{};
  std::uint64_t message_bytes{};
  RootPrologue prologue{RootPrologue::None};
  std::vector<ChunkSpec> chunks;
  std::vector<std::vector<Event>> per_rank_ops;

  bool operator==(const Schedule&) const = default;
};

/// Splits message_bytes into ceil(message_bytes / chunk_bytes) contiguous
/// chunks; all chunks share chunk_bytes except a possibly shorter final one.
/// chunk_bytes larger than the message clamps to a single chunk; a zero-byte
/// message yields a single zero-length chunk. chunk_bytes == 0 throws.
std::vector<ChunkSpec> make_chunks(std::uint64_t message_bytes,
                                   std::uint64_t chunk_bytes);

struct ScheduleViolation {
  int rank{-1};  // -1 when the violation is not tied to a rank
  std::size_t event_index{0};
  std::string description;
};

/// Returns the first violated Schedule invariant, or nullopt if valid.
std::optional<ScheduleViolation> validate_schedule(const Schedule& schedule);

/// Line-oriented text form, one event per line: `rank op peer chunk`.
std::string to_text(const Schedule& schedule);

/// Smallest L >= 0 with base^L >= n. Requires base >= 2, n >= 1.
int ceil_log(int base, std::int64_t n);

}  // namespace bcastlab
