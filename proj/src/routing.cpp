#include "basedlab/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "basedlab/errors.hpp"

namespace basedlab::routing {

namespace {

void require_finite(const Embedding& e) {
  for (double v : e)
    if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "embedding entries must be finite");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Matrix to_matrix(std::span<const Embedding> rows, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim)
      throw Error(ErrorKind::Shape, "embedding " + std::to_string(r) + " has dimension " +
                                        std::to_string(rows[r].size()) + ", expected " + std::to_string(dim));
    require_finite(rows[r]);
    for (std::size_t c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

std::vector<double> embedding_radius(const Embedding& current, std::span<const Embedding> previous) {
  if (previous.empty()) throw Error(ErrorKind::Domain, "embedding history is empty");
  require_finite(current);
  const Matrix prev = to_matrix(previous, current.size());
  return kernels::parallel::row_distances(prev, current);
}

Matrix covariance_matrix(std::span<const Embedding> embeddings) {
  if (embeddings.size() < 2) throw Error(ErrorKind::Domain, "covariance needs at least 2 embeddings");
  return kernels::parallel::covariance(to_matrix(embeddings, embeddings.front().size()));
}

WorkAssignment distribute_work(std::span<const Embedding> items, std::span<const PeerHistory> peers,
                               const RoutingOptions& options) {
  if (peers.empty()) throw Error(ErrorKind::Domain, "no peers to distribute work to");

  std::vector<const PeerHistory*> ordered;
  for (const auto& p : peers) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const PeerHistory* a, const PeerHistory* b) { return a->peer_id < b->peer_id; });
  for (std::size_t k = 1; k < ordered.size(); ++k)
    if (ordered[k]->peer_id == ordered[k - 1]->peer_id)
      throw Error(ErrorKind::Duplicate, "peer id " + std::to_string(ordered[k]->peer_id) + " appears twice");

  WorkAssignment assignment;
  if (items.empty()) return assignment;
  const std::size_t dim = items.front().size();
  const Matrix item_matrix = to_matrix(items, dim);

  std::vector<kernels::History> histories;
  std::vector<Embedding> pooled;
  for (const PeerHistory* p : ordered) {
    histories.push_back(to_matrix(p->previous_embeddings, dim));
    pooled.insert(pooled.end(), p->previous_embeddings.begin(), p->previous_embeddings.end());
  }

  if (pooled.empty()) {
    for (std::size_t i = 0; i < items.size(); ++i)
      assignment[ordered[i % ordered.size()]->peer_id].push_back(i);
    return assignment;
  }

  Matrix metric;
  if (options.mahalanobis) {
    if (pooled.size() < 2) throw Error(ErrorKind::Domain, "Mahalanobis routing needs at least 2 history embeddings");
    metric = covariance_matrix(pooled).completeOrthogonalDecomposition().pseudoInverse();
  }
  const std::vector<std::size_t> chosen = kernels::parallel::nearest_history(
      item_matrix, histories, options.aggregate, options.mahalanobis ? &metric : nullptr);
  for (std::size_t i = 0; i < chosen.size(); ++i) assignment[ordered[chosen[i]]->peer_id].push_back(i);
  return assignment;
}

Embedding hash_embedding(std::string_view data, std::size_t dim, std::uint64_t seed) {
  std::uint64_t state = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : data) state = (state ^ c) * 0x100000001b3ULL;
  Embedding out(dim);
  for (double& v : out) v = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  return out;
}

}  // namespace basedlab::routing
