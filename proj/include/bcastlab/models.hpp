// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "bcastlab/core.hpp"

namespace bcastlab {

/// Closed-form broadcast cost split into a startup-proportional part, a
/// bandwidth-proportional part, and (for staged designs) a staging part.
/// total_s is always the sum of the three terms.
struct CostBreakdown {
  double startup_term_s{};
  double bandwidth_term_s{};
  double staging_term_s{};
  double total_s{};

  bool operator==(const CostBreakdown&) const = default;
};

CostBreakdown make_cost(double startup_term_s, double bandwidth_term_s,
                        double staging_term_s = 0.0);

// Serialized root loop: n * (startup + M/B).
CostBreakdown cost_direct(int n, std::uint64_t message_bytes,
                          const NetworkParams& p);

// Store-and-forward line of n-1 hops: (n-1) * (startup + M/B).
CostBreakdown cost_chain(int n, std::uint64_t message_bytes,
                         const NetworkParams& p);

// Tree broadcast with radix k: ceil(log_k n) * (startup + M/B).
CostBreakdown cost_knomial(int n, int radix_k, std::uint64_t message_bytes,
                           const NetworkParams& p);

// Binomial scatter plus ring allgather:
// (ceil(log2 n) + n - 1) * startup + 2 * ((n-1)/n) * M/B.
CostBreakdown cost_scatter_ring_allgather(int n, std::uint64_t message_bytes,
                                          const NetworkParams& p);

// Chunked chain: (ceil(M/C) + n - 2) * (startup + C/B), with C clamped to M
// and every chunk billed at the uniform chunk size.
CostBreakdown cost_chain_pipelined(int n, std::uint64_t message_bytes,
                                   std::uint64_t chunk_bytes,
                                   const NetworkParams& p);

// Knomial tree preceded by a host staging copy: M/B_staging + tree cost.
CostBreakdown cost_knomial_staged(int n, int radix_k,
                                  std::uint64_t message_bytes,
                                  const NetworkParams& p);

/// Dispatch on config.algorithm.
CostBreakdown cost_for(const AlgorithmConfig& config, int n,
                       std::uint64_t message_bytes, const NetworkParams& p);

}  // namespace bcastlab
