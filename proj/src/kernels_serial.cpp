// Reference implementations: plain loops, no threading.

#include "basedlab/kernels.hpp"
#include "kernels_detail.hpp"

namespace basedlab::kernels::serial {

using detail::row_of;

std::vector<double> row_stddev(const Matrix& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = population_stddev(row_of(x, i));
  return out;
}

void scale_rows(Matrix& x, std::span<const double> factors) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (double& v : row_of(x, i)) v *= factors[i];
}

void quantize_rows(Matrix& x, int levels) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) quantize_row(row_of(x, i), levels);
}

std::vector<double> mat_vec(const Matrix& w, std::span<const double> s) {
  std::vector<double> out(static_cast<std::size_t>(w.rows()), 0.0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * s[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> weighted_column_sums(const Matrix& t, std::span<const double> s) {
  std::vector<double> out(static_cast<std::size_t>(t.cols()), 0.0);
  for (Eigen::Index i = 0; i < t.cols(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < t.rows(); ++j) acc += t(j, i) * s[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> row_distances(const Matrix& points, std::span<const double> query) {
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    out[r] = std::sqrt(squared_distance(row_of(points, r), query));
  return out;
}

Matrix covariance(const Matrix& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) mean[c] += rows(r, c);
    mean[c] /= static_cast<double>(n);
  }
  Matrix cov(d, d);
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
  std::vector<std::size_t> out(static_cast<std::size_t>(items.rows()));
  for (Eigen::Index i = 0; i < items.rows(); ++i)
    out[i] = detail::argmin_history(row_of(items, i), peers, aggregate, metric);
  return out;
}

}  // namespace basedlab::kernels::serial
