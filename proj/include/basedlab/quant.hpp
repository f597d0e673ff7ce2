#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "basedlab/defaults.hpp"
#include "basedlab/matrix.hpp"

namespace basedlab::quant {

/// N samples (rows) by M features (columns).
using SampleMatrix = Matrix;

struct SqueezeParams {
  int levels = defaults::kQuantLevels;
  double threshold = defaults::kAdaptiveThreshold;
  double alpha = defaults::kScaleFactor;

  void validate() const;
};

struct QatParams {
  double mu = 0.0;
  double sigma = 1.0;
  double q_scale = 1.0;
  double q_zero = 0.0;

  void validate() const;
};

void validate_samples(const SampleMatrix& x);

/// Population standard deviation of each row (divide by M).
std::vector<double> row_stddev(const SampleMatrix& x);

/// Row i times alpha when sigma_i > threshold, else times 1/alpha.
SampleMatrix adaptive_scale(const SampleMatrix& x, const SqueezeParams& params);

/// Per-row grid with step (max - min) / (L - 1); constant rows pass through.
SampleMatrix quantize_rows(const SampleMatrix& x, int levels);

/// quantize_rows(adaptive_scale(x)).
SampleMatrix squeeze_forward(const SampleMatrix& x, const SqueezeParams& params = {});

double round_half_away(double v);
double qat_quantize(double x, const QatParams& p);
double qat_dequantize(double q, const QatParams& p);
inline double qat_round_trip(double x, const QatParams& p) { return qat_dequantize(qat_quantize(x, p), p); }

// Toy multi-head attention.

struct HeadSpec {
  std::vector<Matrix> query;  // per head: d_model x d_head
  std::vector<Matrix> key;
  std::vector<Matrix> value;
  Matrix output;              // (k * d_head) x d_out

  std::size_t head_count() const { return query.size(); }
  Eigen::Index d_model() const { return query.empty() ? 0 : query.front().rows(); }
  Eigen::Index d_head() const { return query.empty() ? 0 : query.front().cols(); }

  /// Throws Shape unless all per-head matrices agree and compose with `output`.
  void validate() const;
};

/// Deterministic random spec; entries uniform in [-1, 1) scaled by 1/sqrt(d_model).
HeadSpec make_toy_spec(std::size_t heads, Eigen::Index d_model, Eigen::Index d_head, Eigen::Index d_out,
                       std::uint64_t seed);
/// Deterministic random matrix, entries uniform in [-1, 1).
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

struct AttentionTrace {
  Matrix output;
  std::vector<Matrix> attention;  // per head softmax weights (tokens x tokens); empty when masked
};

/// active[h] == false zeroes head h's block of the concatenation.
AttentionTrace mha_forward_traced(const HeadSpec& spec, const Matrix& x, const std::vector<bool>& active);
Matrix mha_forward(const HeadSpec& spec, const Matrix& x, const std::vector<bool>& active);

double mean_squared_error(const Matrix& a, const Matrix& b);

/// S(h) = err(head h masked) - err(all heads), clamped at 0; err is the mean
/// squared deviation from `reference`.
std::vector<double> head_significance(const HeadSpec& spec, const Matrix& eval_input, const Matrix& reference);

/// Heads with S(h) > theta.
std::vector<std::size_t> significant_heads(std::span<const double> scores, double theta);

inline constexpr std::size_t kExactSelectionLimit = 20;

/// Best subset with total cost strictly below c_max. Exhaustive for up to 20
/// heads (ties -> lexicographically smallest index set), greedy by
/// score/cost ratio beyond that.
std::vector<std::size_t> select_heads(std::span<const double> scores, std::span<const double> costs, double c_max);
std::vector<std::size_t> select_heads_exact(std::span<const double> scores, std::span<const double> costs,
                                            double c_max);
std::vector<std::size_t> select_heads_greedy(std::span<const double> scores, std::span<const double> costs,
                                             double c_max);

}  // namespace basedlab::quant
