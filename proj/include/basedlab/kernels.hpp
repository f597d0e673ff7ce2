#pragma once

// Data-parallel inner loops shared by the quant, consensus and routing
// modules. `parallel` is what the library calls; `serial` is the reference
// kept for tests and the benchmark. Each output element is produced by one
// thread with a fixed inner-loop order, so the two agree bit for bit.

#include <cstddef>
#include <span>
#include <vector>

#include "basedlab/matrix.hpp"

namespace basedlab::kernels {

enum class Aggregate { Min, Mean };

/// Histories of one peer stacked as rows; an empty matrix means "no history".
using History = Matrix;

// Per-row math, exposed so callers can reuse it on single rows.
double population_stddev(std::span<const double> row);
void quantize_row(std::span<double> row, int levels);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// (a-b)^T M (a-b) with M symmetric d x d.
double metric_distance_sq(std::span<const double> a, std::span<const double> b, const Matrix& metric);

#define BASEDLAB_KERNEL_DECLS                                                                \
  std::vector<double> row_stddev(const Matrix& x);                                           \
  void scale_rows(Matrix& x, std::span<const double> factors);                               \
  void quantize_rows(Matrix& x, int levels);                                                 \
  std::vector<double> mat_vec(const Matrix& w, std::span<const double> s);                   \
  std::vector<double> weighted_column_sums(const Matrix& t, std::span<const double> s);      \
  std::vector<double> row_distances(const Matrix& points, std::span<const double> query);    \
  Matrix covariance(const Matrix& rows);                                                     \
  std::vector<std::size_t> nearest_history(const Matrix& items, std::span<const History> peers, \
                                           Aggregate aggregate, const Matrix* metric);

namespace parallel {
BASEDLAB_KERNEL_DECLS
}  // namespace parallel

namespace serial {
BASEDLAB_KERNEL_DECLS
}  // namespace serial

#undef BASEDLAB_KERNEL_DECLS

/// Sentinel returned by nearest_history when every history is empty.
inline constexpr std::size_t kNoPeer = static_cast<std::size_t>(-1);

}  // namespace basedlab::kernels
