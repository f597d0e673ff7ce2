#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "basedlab/kernels.hpp"

namespace basedlab::kernels::detail {

inline std::span<const double> row_of(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<double> row_of(Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

// Aggregate distance from one item to one peer's history; +inf when empty.
inline double history_distance(std::span<const double> item, const History& history,
                               Aggregate aggregate, const Matrix* metric) {
  if (history.rows() == 0) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (Eigen::Index h = 0; h < history.rows(); ++h) {
    const auto prev = row_of(history, h);
    const double d = std::sqrt(metric ? metric_distance_sq(item, prev, *metric)
                                      : squared_distance(item, prev));
    best = std::min(best, d);
    sum += d;
  }
  return aggregate == Aggregate::Min ? best : sum / static_cast<double>(history.rows());
}

inline std::size_t argmin_history(std::span<const double> item, std::span<const History> peers,
                                  Aggregate aggregate, const Matrix* metric) {
  std::size_t chosen = kNoPeer;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < peers.size(); ++p) {
    const double d = history_distance(item, peers[p], aggregate, metric);
    if (d < best) {
      best = d;
      chosen = p;
    }
  }
  return chosen;
}

}  // namespace basedlab::kernels::detail
