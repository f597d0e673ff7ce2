#include <algorithm>
#include <cmath>

#include "basedlab/kernels.hpp"

namespace basedlab::kernels {

double population_stddev(std::span<const double> row) {
  if (row.empty()) return 0.0;
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  double acc = 0.0;
  for (double v : row) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(row.size()));
}

// q = floor((x - lo) / step) * step + lo, step = (hi - lo) / (levels - 1).
// The top level is pinned to `hi` and the floor is corrected against the
// exact expression used for the output, so the grid is a fixed point.
void quantize_row(std::span<double> row, int levels) {
  if (row.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(row.begin(), row.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return;
  const double step = (hi - lo) / static_cast<double>(levels - 1);
  const long top = levels - 1;
  for (double& x : row) {
    if (x == hi) continue;
    long m = static_cast<long>(std::floor((x - lo) / step));
    m = std::clamp(m, 0L, top);
    while (m < top && lo + static_cast<double>(m + 1) * step <= x) ++m;
    while (m > 0 && lo + static_cast<double>(m) * step > x) --m;
    x = (m == top) ? hi : lo + static_cast<double>(m) * step;
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double metric_distance_sq(std::span<const double> a, std::span<const double> b, const Matrix& metric) {
  const std::size_t d = a.size();
  double acc = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    const double dr = a[r] - b[r];
    double inner = 0.0;
    for (std::size_t c = 0; c < d; ++c) inner += metric(r, c) * (a[c] - b[c]);
    acc += dr * inner;
  }
  return std::max(acc, 0.0);
}

}  // namespace basedlab::kernels
