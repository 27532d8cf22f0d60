// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bcastlab/core.hpp"

namespace bcastlab {

struct SimEventRecord {
  int rank{};
  std::size_t event_index{};  // index into the rank's op list
  Event::Kind kind{};
  int peer{};
  std::uint32_t chunk{};
  double start_s{};
  double end_s{};

  bool operator==(const SimEventRecord&) const = default;
};

struct SimResult {
  std::vector<double> completion_s;         // per rank, last activity end
  std::vector<SimEventRecord> per_event_times;  // populated when tracing
  bool coverage_ok{};

  double max_completion_s() const;

  bool operator==(const SimResult&) const = default;
};

struct SimOptions {
  bool record_trace{false};
};

/// Deterministic discrete-event execution of a schedule.
///
/// Timing contract:
///   - a transfer of c bytes holds the sender's outgoing port and the
///     receiver's incoming port for startup_s + c/B seconds,
///   - each rank's sends run in list order on its single outgoing port and
///     its receives in list order on its single incoming port; one send and
///     one receive may overlap (full duplex),
///   - a transfer starts once the sender owns the chunk (store and forward),
///     the sender's port is free, and the receiver has finished every
///     earlier receive in its list (rendezvous),
///   - a nonzero send group forms a batch whose transfers start together:
///     consecutive sends to one peer fuse into a single transfer (one
///     startup, summed bytes) and distinct peers proceed on parallel
///     subports; the outgoing port frees when the whole batch is done,
///   - the root prologue delays the root's first send: one local
///     startup_s + M/B step for the direct algorithm's self-send, M/B_staging
///     for host staging.
///
/// Rejects invalid schedules (std::invalid_argument) and reports per-rank
/// completion times plus a data-coverage flag.
SimResult simulate(const Schedule& schedule, const NetworkParams& params,
                   const SimOptions& options = {});

/// Replays ownership propagation ignoring time; true iff every rank ends up
/// owning every chunk.
bool verify_coverage(const Schedule& schedule);

/// CSV trace: header plus one `rank,event_index,kind,peer,chunk,start_s,end_s`
/// row per event.
void write_trace_csv(const SimResult& result, std::ostream& out);

}  // namespace bcastlab
