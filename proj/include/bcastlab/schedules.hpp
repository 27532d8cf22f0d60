// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "bcastlab/core.hpp"

namespace bcastlab {

// Every generator lays the algorithm out over logical ranks 0..n-1 with the
// root at logical 0, then relabels logical rank l to actual rank
// (l + root) mod n. Chunk offsets always refer to the original message, so
// relabeling never moves data.

Schedule schedule_direct(int n, int root, std::uint64_t message_bytes);

Schedule schedule_chain(int n, int root, std::uint64_t message_bytes);

Schedule schedule_knomial(int n, int radix_k, int root,
                          std::uint64_t message_bytes);

Schedule schedule_scatter_ring_allgather(int n, int root,
                                         std::uint64_t message_bytes);

Schedule schedule_chain_pipelined(int n, int root, std::uint64_t message_bytes,
                                  std::uint64_t chunk_bytes);

Schedule schedule_knomial_staged(int n, int radix_k, int root,
                                 std::uint64_t message_bytes);

/// Dispatch on config.algorithm.
Schedule make_schedule(const AlgorithmConfig& config, int n, int root,
                       std::uint64_t message_bytes);

}  // namespace bcastlab
