#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "basedlab/kernels.hpp"
#include "basedlab/matrix.hpp"

namespace basedlab::routing {

using Embedding = std::vector<double>;
using PeerId = std::int64_t;

struct PeerHistory {
  PeerId peer_id = 0;
  std::vector<Embedding> previous_embeddings;
};

/// peer id -> item indices, ascending. Peers that received nothing are absent.
using WorkAssignment = std::map<PeerId, std::vector<std::size_t>>;

using Aggregate = kernels::Aggregate;

struct RoutingOptions {
  Aggregate aggregate = Aggregate::Min;
  /// Measure distance with the pseudo-inverse of the pooled history covariance.
  bool mahalanobis = false;
};

/// Euclidean distance from `current` to each previous embedding, in order.
std::vector<double> embedding_radius(const Embedding& current, std::span<const Embedding> previous);

/// Sample covariance (n - 1 denominator) of the embeddings.
Matrix covariance_matrix(std::span<const Embedding> embeddings);

/// Each item goes to the peer whose history is closest; empty histories are
/// infinitely far; ties go to the lower peer id. With no history anywhere,
/// items are dealt round-robin over ascending peer ids.
WorkAssignment distribute_work(std::span<const Embedding> items, std::span<const PeerHistory> peers,
                               const RoutingOptions& options = {});

/// Deterministic pseudo-embedding of arbitrary data, entries in [-1, 1).
Embedding hash_embedding(std::string_view data, std::size_t dim, std::uint64_t seed);

Matrix to_matrix(std::span<const Embedding> rows, std::size_t dim);

}  // namespace basedlab::routing
