#include "basedlab/quant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "basedlab/errors.hpp"
#include "basedlab/kernels.hpp"

namespace basedlab::quant {

void SqueezeParams::validate() const {
  if (levels < 2) throw Error(ErrorKind::Domain, "quantization levels must be >= 2");
  if (!std::isfinite(threshold)) throw Error(ErrorKind::Domain, "adaptive threshold must be finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Domain, "scale factor must lie in (0,1)");
}

void QatParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(q_zero)) throw Error(ErrorKind::Domain, "mu and q_zero must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::Domain, "sigma must be positive");
  if (q_scale == 0.0 || !std::isfinite(q_scale)) throw Error(ErrorKind::Domain, "q_scale must be non-zero");
}

void validate_samples(const SampleMatrix& x) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorKind::Shape, "sample matrix must be at least 1x1");
  if (!x.allFinite()) throw Error(ErrorKind::Domain, "sample matrix entries must be finite");
}

std::vector<double> row_stddev(const SampleMatrix& x) {
  validate_samples(x);
  return kernels::parallel::row_stddev(x);
}

SampleMatrix adaptive_scale(const SampleMatrix& x, const SqueezeParams& params) {
  params.validate();
  std::vector<double> factors = row_stddev(x);
  for (double& f : factors) f = f > params.threshold ? params.alpha : 1.0 / params.alpha;
  SampleMatrix out = x;
  kernels::parallel::scale_rows(out, factors);
  return out;
}

SampleMatrix quantize_rows(const SampleMatrix& x, int levels) {
  if (levels < 2) throw Error(ErrorKind::Domain, "quantization levels must be >= 2");
  validate_samples(x);
  SampleMatrix out = x;
  kernels::parallel::quantize_rows(out, levels);
  return out;
}

SampleMatrix squeeze_forward(const SampleMatrix& x, const SqueezeParams& params) {
  return quantize_rows(adaptive_scale(x, params), params.levels);
}

double round_half_away(double v) { return std::round(v); }

double qat_quantize(double x, const QatParams& p) {
  p.validate();
  return round_half_away((x - p.mu) / p.sigma) * p.q_scale + p.q_zero;
}

double qat_dequantize(double q, const QatParams& p) {
  p.validate();
  return ((q - p.q_zero) / p.q_scale) * p.sigma + p.mu;
}

void HeadSpec::validate() const {
  const std::size_t k = head_count();
  if (k == 0) throw Error(ErrorKind::Shape, "head spec has no heads");
  if (key.size() != k || value.size() != k) throw Error(ErrorKind::Shape, "query/key/value head counts differ");
  const Eigen::Index dm = d_model();
  const Eigen::Index dh = d_head();
  for (std::size_t h = 0; h < k; ++h)
    for (const Matrix* m : {&query[h], &key[h], &value[h]})
      if (m->rows() != dm || m->cols() != dh)
        throw Error(ErrorKind::Shape, "head " + std::to_string(h) + " projection is not d_model x d_head");
  if (output.rows() != static_cast<Eigen::Index>(k) * dh)
    throw Error(ErrorKind::Shape, "output matrix rows must equal heads * d_head");
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  return m;
}

HeadSpec make_toy_spec(std::size_t heads, Eigen::Index d_model, Eigen::Index d_head, Eigen::Index d_out,
                       std::uint64_t seed) {
  HeadSpec spec;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
  for (std::size_t h = 0; h < heads; ++h) {
    spec.query.push_back(random_matrix(d_model, d_head, seed + 3 * h + 1) * scale);
    spec.key.push_back(random_matrix(d_model, d_head, seed + 3 * h + 2) * scale);
    spec.value.push_back(random_matrix(d_model, d_head, seed + 3 * h + 3) * scale);
  }
  spec.output = random_matrix(static_cast<Eigen::Index>(heads) * d_head, d_out, seed ^ 0x5eedULL) * scale;
  return spec;
}

namespace {

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double peak = scores.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      out(r, c) = std::exp(scores(r, c) - peak);
      sum += out(r, c);
    }
    out.row(r) /= sum;
  }
  return out;
}

}  // namespace

AttentionTrace mha_forward_traced(const HeadSpec& spec, const Matrix& x, const std::vector<bool>& active) {
  spec.validate();
  const std::size_t k = spec.head_count();
  if (x.cols() != spec.d_model()) throw Error(ErrorKind::Shape, "input width must equal d_model");
  if (active.size() != k) throw Error(ErrorKind::Shape, "active mask length must equal head count");
  const Eigen::Index dh = spec.d_head();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  AttentionTrace trace;
  trace.attention.resize(k);
  Matrix concat = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(k) * dh);
  for (std::size_t h = 0; h < k; ++h) {
    if (!active[h]) continue;
    const Matrix q = x * spec.query[h];
    const Matrix kk = x * spec.key[h];
    const Matrix v = x * spec.value[h];
    trace.attention[h] = softmax_rows((q * kk.transpose()) * inv_sqrt);
    concat.middleCols(static_cast<Eigen::Index>(h) * dh, dh) = trace.attention[h] * v;
  }
  trace.output = concat * spec.output;
  return trace;
}

Matrix mha_forward(const HeadSpec& spec, const Matrix& x, const std::vector<bool>& active) {
  return mha_forward_traced(spec, x, active).output;
}

double mean_squared_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::Shape, "matrices differ in shape");
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

std::vector<double> head_significance(const HeadSpec& spec, const Matrix& eval_input, const Matrix& reference) {
  spec.validate();
  const std::size_t k = spec.head_count();
  const Matrix full = mha_forward(spec, eval_input, std::vector<bool>(k, true));
  const double base_error = mean_squared_error(full, reference);
  std::vector<double> scores(k);
  const auto heads = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t h = 0; h < heads; ++h) {
    std::vector<bool> active(k, true);
    active[static_cast<std::size_t>(h)] = false;
    const double masked_error = mean_squared_error(mha_forward(spec, eval_input, active), reference);
    scores[static_cast<std::size_t>(h)] = std::max(0.0, masked_error - base_error);
  }
  return scores;
}

std::vector<std::size_t> significant_heads(std::span<const double> scores, double theta) {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < scores.size(); ++h)
    if (scores[h] > theta) out.push_back(h);
  return out;
}

namespace {

void validate_selection(std::span<const double> scores, std::span<const double> costs) {
  if (scores.size() != costs.size()) throw Error(ErrorKind::Shape, "scores and costs differ in length");
  for (double c : costs)
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::Domain, "head costs must be positive");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(ErrorKind::Domain, "head scores must be finite");
}

// True when the index set of `a` precedes that of `b` lexicographically.
bool lex_less(std::uint64_t a, std::uint64_t b, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    const bool in_a = (a >> i) & 1U;
    const bool in_b = (b >> i) & 1U;
    if (in_a == in_b) continue;
    // The set holding i has the smaller element at this position, unless the
    // other set has already ended (then the shorter prefix wins).
    const std::uint64_t rest = ~((std::uint64_t{2} << i) - 1);
    if (in_a) return (b & rest) != 0;
    return (a & rest) == 0;
  }
  return false;
}

}  // namespace

std::vector<std::size_t> select_heads_exact(std::span<const double> scores, std::span<const double> costs,
                                            double c_max) {
  validate_selection(scores, costs);
  const std::size_t k = scores.size();
  if (k > kExactSelectionLimit) throw Error(ErrorKind::Domain, "exact head selection supports at most 20 heads");
  if (!(c_max > 0.0)) return {};

  std::uint64_t best_mask = 0;
  double best_score = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << k;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    double total_cost = 0.0;
    double total_score = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if ((mask >> i) & 1U) {
        total_cost += costs[i];
        total_score += scores[i];
      }
    if (!(total_cost < c_max)) continue;
    if (total_score > best_score || (total_score == best_score && lex_less(mask, best_mask, k))) {
      best_score = total_score;
      best_mask = mask;
    }
  }
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < k; ++i)
    if ((best_mask >> i) & 1U) chosen.push_back(i);
  return chosen;
}

std::vector<std::size_t> select_heads_greedy(std::span<const double> scores, std::span<const double> costs,
                                             double c_max) {
  validate_selection(scores, costs);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] / costs[a] > scores[b] / costs[b];
  });
  std::vector<std::size_t> chosen;
  double spent = 0.0;
  for (std::size_t h : order) {
    if (!(scores[h] > 0.0)) continue;
    if (spent + costs[h] < c_max) {
      spent += costs[h];
      chosen.push_back(h);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> select_heads(std::span<const double> scores, std::span<const double> costs, double c_max) {
  if (scores.size() <= kExactSelectionLimit) return select_heads_exact(scores, costs, c_max);
  return select_heads_greedy(scores, costs, c_max);
}

}  // namespace basedlab::quant
