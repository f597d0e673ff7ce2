#include "basedlab/kernels.hpp"
#include "kernels_detail.hpp"

namespace basedlab::kernels::parallel {

using detail::row_of;

std::vector<double> row_stddev(const Matrix& x) {
  const Eigen::Index n = x.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = population_stddev(row_of(x, i));
  return out;
}

void scale_rows(Matrix& x, std::span<const double> factors) {
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (double& v : row_of(x, i)) v *= factors[i];
}

void quantize_rows(Matrix& x, int levels) {
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) quantize_row(row_of(x, i), levels);
}

std::vector<double> mat_vec(const Matrix& w, std::span<const double> s) {
  const Eigen::Index n = w.rows();
  const Eigen::Index m = w.cols();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += w(i, j) * s[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> weighted_column_sums(const Matrix& t, std::span<const double> s) {
  const Eigen::Index n = t.cols();
  const Eigen::Index m = t.rows();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += t(j, i) * s[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> row_distances(const Matrix& points, std::span<const double> query) {
  const Eigen::Index n = points.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) out[r] = std::sqrt(squared_distance(row_of(points, r), query));
  return out;
}

Matrix covariance(const Matrix& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < d; ++c) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) acc += rows(r, c);
    mean[c] = acc / static_cast<double>(n);
  }
  Matrix cov(d, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) acc += (rows(r, a) - mean[a]) * (rows(r, b) - mean[b]);
      cov(a, b) = acc / static_cast<double>(n - 1);
    }
  }
  return cov;
}

std::vector<std::size_t> nearest_history(const Matrix& items, std::span<const History> peers,
                                         Aggregate aggregate, const Matrix* metric) {
  const Eigen::Index n = items.rows();
  std::vector<std::size_t> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = detail::argmin_history(row_of(items, i), peers, aggregate, metric);
  return out;
}

}  // namespace basedlab::kernels::parallel
