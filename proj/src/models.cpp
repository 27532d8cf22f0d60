// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include "bcastlab/models.hpp"

#include <stdexcept>

namespace bcastlab {

namespace {

void require_ranks(int n) {
  if (n < 1) {
    throw std::invalid_argument("rank count must be >= 1");
  }
}

double bytes_over(double bandwidth_Bps, std::uint64_t bytes) {
  return static_cast<double>(bytes) / bandwidth_Bps;
}

}  // namespace

CostBreakdown make_cost(double startup_term_s, double bandwidth_term_s,
                        double staging_term_s) {
  CostBreakdown c;
  c.startup_term_s = startup_term_s;
  c.bandwidth_term_s = bandwidth_term_s;
  c.staging_term_s = staging_term_s;
  c.total_s = startup_term_s + bandwidth_term_s + staging_term_s;
  return c;
}

CostBreakdown cost_direct(int n, std::uint64_t message_bytes,
                          const NetworkParams& p) {
  require_ranks(n);
  p.validate();
  const double steps = static_cast<double>(n);
  return make_cost(steps * p.startup_s,
                   steps * bytes_over(p.link_bandwidth_Bps, message_bytes));
}

CostBreakdown cost_chain(int n, std::uint64_t message_bytes,
                         const NetworkParams& p) {
  require_ranks(n);
  p.validate();
  const double hops = static_cast<double>(n - 1);
  return make_cost(hops * p.startup_s,
                   hops * bytes_over(p.link_bandwidth_Bps, message_bytes));
}

CostBreakdown cost_knomial(int n, int radix_k, std::uint64_t message_bytes,
                           const NetworkParams& p) {
  require_ranks(n);
  if (radix_k < 2) {
    throw std::invalid_argument("radix must be >= 2");
  }
  p.validate();
  const double rounds = static_cast<double>(ceil_log(radix_k, n));
  return make_cost(rounds * p.startup_s,
                   rounds * bytes_over(p.link_bandwidth_Bps, message_bytes));
}

CostBreakdown cost_scatter_ring_allgather(int n, std::uint64_t message_bytes,
                                          const NetworkParams& p) {
  require_ranks(n);
  p.validate();
  const double steps = static_cast<double>(ceil_log(2, n) + n - 1);
  const double fraction = static_cast<double>(n - 1) / static_cast<double>(n);
  return make_cost(
      steps * p.startup_s,
      2.0 * fraction * bytes_over(p.link_bandwidth_Bps, message_bytes));
}

CostBreakdown cost_chain_pipelined(int n, std::uint64_t message_bytes,
                                   std::uint64_t chunk_bytes,
                                   const NetworkParams& p) {
  if (n < 2) {
    throw std::invalid_argument("pipelined chain needs at least 2 ranks");
  }
  p.validate();
  // make_chunks clamps oversized chunks and maps a zero-byte message to one
  // empty chunk; the closed form bills every chunk at the uniform size.
  const auto chunks = make_chunks(message_bytes, chunk_bytes);
  const double steps = static_cast<double>(chunks.size() +
                                           static_cast<std::uint64_t>(n) - 2);
  return make_cost(
      steps * p.startup_s,
      steps * bytes_over(p.link_bandwidth_Bps, chunks.front().length_bytes));
}

CostBreakdown cost_knomial_staged(int n, int radix_k,
                                  std::uint64_t message_bytes,
                                  const NetworkParams& p) {
  require_ranks(n);
  if (radix_k < 2) {
    throw std::invalid_argument("radix must be >= 2");
  }
  p.validate();
  const double rounds = static_cast<double>(ceil_log(radix_k, n));
  return make_cost(rounds * p.startup_s,
                   rounds * bytes_over(p.link_bandwidth_Bps, message_bytes),
                   bytes_over(p.staging_bandwidth_Bps, message_bytes));
}

CostBreakdown cost_for(const AlgorithmConfig& config, int n,
                       std::uint64_t message_bytes, const NetworkParams& p) {
  config.validate();
  switch (config.algorithm) {
    case Algorithm::Direct:
      return cost_direct(n, message_bytes, p);
    case Algorithm::Chain:
      return cost_chain(n, message_bytes, p);
    case Algorithm::Knomial:
      return cost_knomial(n, config.radix_k, message_bytes, p);
    case Algorithm::ScatterRingAllgather:
      return cost_scatter_ring_allgather(n, message_bytes, p);
    case Algorithm::ChainPipelined:
      return cost_chain_pipelined(n, message_bytes, config.chunk_bytes, p);
    case Algorithm::KnomialStaged:
      return cost_knomial_staged(n, config.radix_k, message_bytes, p);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace bcastlab
