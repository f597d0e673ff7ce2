#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "basedlab/defaults.hpp"
#include "basedlab/token_amount.hpp"

namespace basedlab::econ {

struct EmissionSchedule {
  TokenAmount genesis_block_reward = TokenAmount::from_tokens(defaults::kGenesisBlockRewardTokens);
  std::int64_t blocks_per_year = defaults::kBlocksPerYear;
  std::int64_t halving_interval_years = 1;
};

struct BrainStakeProfile {
  int brain_id = 0;
  TokenAmount total_stake;
  double performance = 1.0;
  double owner_fraction = defaults::kOwnerFraction;
};

struct ModelPricing {
  std::string provider;
  std::string name;
  TokenAmount prompt_cost_per_1k;
  TokenAmount completion_cost_per_1k;
  std::int64_t context_units = 0;

  std::string display_name() const { return provider.empty() ? name : provider + ": " + name; }
};

struct RewardSplit {
  TokenAmount nodes;
  TokenAmount owner;
};

// Emission

TokenAmount block_reward(const EmissionSchedule& schedule, std::int64_t year);
TokenAmount annual_emission(const EmissionSchedule& schedule, std::int64_t year);
std::int64_t year_of_block(const EmissionSchedule& schedule, std::int64_t height);
TokenAmount emission_at_block(const EmissionSchedule& schedule, std::int64_t height);

// Brain acquisition (amounts in Pepecoin)

TokenAmount burn_cost(std::int64_t already_burn_issued);
TokenAmount cumulative_burn(std::int64_t count);

// Reward splitting

/// nodes = floor(total * (1 - owner_fraction)); the owner takes the remainder.
RewardSplit split_reward(TokenAmount total, double owner_fraction);

struct DistributionOptions {
  double bonus_pool_fraction = defaults::kBonusPoolFraction;
  double stake_cap_fraction = defaults::kStakeCapFraction;
  /// Network stake used for the cap; defaults to the sum over the profiles.
  std::optional<TokenAmount> network_stake;
};

/// Stake cap: floor(network_stake * cap_fraction).
TokenAmount stake_cap(TokenAmount network_stake, double cap_fraction);

/// Per-brain allocation of one reward, in profile order.
std::vector<TokenAmount> distribute_block_reward(std::span<const BrainStakeProfile> profiles,
                                                 TokenAmount reward,
                                                 const DistributionOptions& options = {});

/// Indices whose stake is >= the nearest-rank 70th percentile.
std::vector<std::size_t> active_validators(std::span<const TokenAmount> stakes);

/// amount * (1 + apy)^years rounded down; apy is snapped to a 1e-12 grid.
TokenAmount project_stake(TokenAmount amount, double apy, std::int64_t years);

// Compute pricing

const std::vector<ModelPricing>& model_catalog();
/// Case-insensitive match on "Provider: Name" or on "Name" alone.
const ModelPricing& find_model(std::string_view name);
TokenAmount quote_compute_cost(const ModelPricing& pricing, std::int64_t prompt_units,
                               std::int64_t completion_units);

}  // namespace basedlab::econ
