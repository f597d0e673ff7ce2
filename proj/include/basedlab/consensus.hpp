#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "basedlab/defaults.hpp"
#include "basedlab/matrix.hpp"

namespace basedlab::consensus {

/// w(i, j): peer i's evaluative score of peer j, in [0,1].
using WeightMatrix = Matrix;
/// t(i, j) in {0,1}: mutual ranking between i and j; zero diagonal.
using TrustMatrix = Matrix;

enum class BetaMode { TextLinear, TableLookup };

struct BetaSchedule {
  BetaMode mode = BetaMode::TextLinear;
  std::int64_t blocks_per_year = defaults::kBetaClockBlocksPerYear;

  double years_at(std::int64_t height) const {
    return static_cast<double>(height) / static_cast<double>(blocks_per_year);
  }
};

struct CreditsLedger {
  std::vector<double> credits;

  void apply(std::span<const double> delta);
  /// credits_i / sum(credits); all zero when the ledger is empty of credit.
  std::vector<double> shares() const;
};

/// Throws Domain unless every entry is finite and in [0,1]; Shape if not square.
void validate_weights(const WeightMatrix& w);
WeightMatrix normalize_rows(const WeightMatrix& w);

TrustMatrix trust_from_weights(const WeightMatrix& w);

/// c_i = sum_j t(j, i) * s_j / sum(s). Throws Degenerate on zero total stake.
std::vector<double> trusted_stake_fraction(const TrustMatrix& t, std::span<const double> stake);

/// Peer i is in consensus iff strictly more than half of the stake trusts it.
std::vector<bool> consensus_set(const TrustMatrix& t, std::span<const double> stake);

/// m_i = 1 / (1 + exp(-lambda (c_i - 0.5))).
std::vector<double> sigmoid_scale(const TrustMatrix& t, std::span<const double> stake,
                                  double lambda = defaults::kSigmoidLambda);
double sigmoid(double c, double lambda);

/// delta_i = sum_j w(i, j) s_j: the scorer accrues, weighted by the scored peer's stake.
std::vector<double> credits_update(const WeightMatrix& w, std::span<const double> stake);

double beta(double t_years, BetaMode mode);

struct IncentiveResult {
  std::vector<double> raw;      // R_i C_i + beta(t) * accuracy
  std::vector<double> weights;  // raw / sum(raw), zeros when sum is zero
  double beta = 0.0;
};

/// I_i = R_i * C_i + beta(t) * accuracy, with R_i the share of base_rewards
/// and C_i the sigmoid consensus multiplier.
IncentiveResult incentive(const WeightMatrix& w, std::span<const double> stake, double tft_accuracy,
                          double t_years, BetaMode mode, std::span<const double> base_rewards,
                          double lambda = defaults::kSigmoidLambda);

/// present[k] tells whether peer k takes part in the evaluated ensemble.
using LossOracle = std::function<double(const std::vector<bool>& present)>;

/// score_i = max(0, loss(all but i) - loss(all)).
std::vector<double> loo_contribution_scores(const LossOracle& loss, std::size_t n);

/// w'(i, j) = clamp(w + rate (contribution_j - credit_share_j) w, 0, 1).
WeightMatrix adaptive_reweight(const WeightMatrix& w, const CreditsLedger& credits,
                               std::span<const double> measured_contribution, double rate);

}  // namespace basedlab::consensus
