#include "basedlab/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "basedlab/errors.hpp"
#include "basedlab/kernels.hpp"

namespace basedlab::consensus {

namespace {

void require_square(const Matrix& m) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::Shape, "matrix must be square, got " + std::to_string(m.rows()) + "x" +
                                      std::to_string(m.cols()));
}

void require_length(const Matrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n)
    throw Error(ErrorKind::Shape, std::string(what) + " has length " + std::to_string(n) +
                                      ", expected " + std::to_string(m.rows()));
}

double checked_total(std::span<const double> stake) {
  double total = 0.0;
  for (double s : stake) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::Domain, "stakes must be finite and >= 0");
    total += s;
  }
  return total;
}

}  // namespace

void CreditsLedger::apply(std::span<const double> delta) {
  if (credits.size() < delta.size()) credits.resize(delta.size(), 0.0);
  for (std::size_t i = 0; i < delta.size(); ++i) credits[i] += delta[i];
}

std::vector<double> CreditsLedger::shares() const {
  const double total = std::accumulate(credits.begin(), credits.end(), 0.0);
  std::vector<double> out(credits.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < credits.size(); ++i) out[i] = credits[i] / total;
  return out;
}

void validate_weights(const WeightMatrix& w) {
  require_square(w);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double v = w.data()[k];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw Error(ErrorKind::Domain, "weight entries must be finite and within [0,1]");
  }
}

WeightMatrix normalize_rows(const WeightMatrix& w) {
  WeightMatrix out = w;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum > 0.0) out.row(i) /= sum;
  }
  return out;
}

TrustMatrix trust_from_weights(const WeightMatrix& w) {
  require_square(w);
  const Eigen::Index n = w.rows();
  TrustMatrix t = TrustMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && w(i, j) > 0.0 && w(j, i) > 0.0) t(i, j) = 1.0;
  return t;
}

std::vector<double> trusted_stake_fraction(const TrustMatrix& t, std::span<const double> stake) {
  require_square(t);
  require_length(t, stake.size(), "stake vector");
  const double total = checked_total(stake);
  if (!(total > 0.0)) throw Error(ErrorKind::Degenerate, "total stake is zero");
  std::vector<double> c = kernels::parallel::weighted_column_sums(t, stake);
  for (double& v : c) v /= total;
  return c;
}

std::vector<bool> consensus_set(const TrustMatrix& t, std::span<const double> stake) {
  require_square(t);
  require_length(t, stake.size(), "stake vector");
  const double total = checked_total(stake);
  if (!(total > 0.0)) throw Error(ErrorKind::Degenerate, "total stake is zero");
  // Compare un-normalized sums so the 0.5 boundary is not blurred by division.
  const std::vector<double> trusted = kernels::parallel::weighted_column_sums(t, stake);
  std::vector<bool> in(trusted.size());
  for (std::size_t i = 0; i < trusted.size(); ++i) in[i] = 2.0 * trusted[i] > total;
  return in;
}

double sigmoid(double c, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Domain, "lambda must be positive");
  return 1.0 / (1.0 + std::exp(-lambda * (c - defaults::kConsensusStakeThreshold)));
}

std::vector<double> sigmoid_scale(const TrustMatrix& t, std::span<const double> stake, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Domain, "lambda must be positive");
  std::vector<double> c = trusted_stake_fraction(t, stake);
  for (double& v : c) v = sigmoid(v, lambda);
  return c;
}

std::vector<double> credits_update(const WeightMatrix& w, std::span<const double> stake) {
  require_square(w);
  require_length(w, stake.size(), "stake vector");
  return kernels::parallel::mat_vec(w, stake);
}

double beta(double t_years, BetaMode mode) {
  if (!(t_years >= 0.0)) throw Error(ErrorKind::Domain, "t must be >= 0");
  if (mode == BetaMode::TableLookup) {
    const double year = std::max(1.0, std::ceil(t_years));
    if (year <= 2.0) return 0.0;
    if (year <= 4.0) return 0.9;
    return 1.0;
  }
  if (t_years <= 2.0) return 0.0;
  if (t_years <= 4.0) return 0.45 * (t_years - 2.0);
  return 1.0;
}

IncentiveResult incentive(const WeightMatrix& w, std::span<const double> stake, double tft_accuracy,
                          double t_years, BetaMode mode, std::span<const double> base_rewards,
                          double lambda) {
  if (!(tft_accuracy >= 0.0 && tft_accuracy <= 1.0))
    throw Error(ErrorKind::Domain, "TFT accuracy must lie in [0,1]");
  require_length(w, base_rewards.size(), "base reward vector");
  const std::vector<double> multiplier = sigmoid_scale(trust_from_weights(w), stake, lambda);

  IncentiveResult result;
  result.beta = beta(t_years, mode);
  const double base_total = checked_total(base_rewards);
  result.raw.resize(multiplier.size());
  for (std::size_t i = 0; i < multiplier.size(); ++i) {
    const double share = base_total > 0.0 ? base_rewards[i] / base_total : 0.0;
    result.raw[i] = share * multiplier[i] + result.beta * tft_accuracy;
  }
  const double total = std::accumulate(result.raw.begin(), result.raw.end(), 0.0);
  result.weights.assign(result.raw.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < result.raw.size(); ++i) result.weights[i] = result.raw[i] / total;
  return result;
}

std::vector<double> loo_contribution_scores(const LossOracle& loss, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::Domain, "need at least one peer");
  std::vector<bool> present(n, true);
  const double full = loss(present);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    present[i] = false;
    scores[i] = std::max(0.0, loss(present) - full);
    present[i] = true;
  }
  return scores;
}

WeightMatrix adaptive_reweight(const WeightMatrix& w, const CreditsLedger& credits,
                               std::span<const double> measured_contribution, double rate) {
  require_square(w);
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorKind::Domain, "rate must lie in [0,1]");
  require_length(w, measured_contribution.size(), "contribution vector");
  if (credits.credits.size() != measured_contribution.size())
    throw Error(ErrorKind::Shape, "credits ledger and contribution vector differ in length");
  const std::vector<double> share = credits.shares();
  WeightMatrix out = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double divergence = measured_contribution[j] - share[j];
      out(i, j) = std::clamp(w(i, j) + rate * divergence * w(i, j), 0.0, 1.0);
    }
  return out;
}

}  // namespace basedlab::consensus
