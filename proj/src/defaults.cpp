#include "basedlab/defaults.hpp"

#include <fmt/format.h>

namespace basedlab::defaults {

std::vector<std::pair<std::string, std::string>> table() {
  return {
      {"genesis_block_reward", fmt::format("{}", kGenesisBlockRewardTokens)},
      {"block_time_seconds", fmt::format("{}", kBlockTimeSeconds)},
      {"blocks_per_year", fmt::format("{}", kBlocksPerYear)},
      {"beta_clock_blocks_per_year", fmt::format("{}", kBetaClockBlocksPerYear)},
      {"max_brains", fmt::format("{}", kMaxBrains)},
      {"burn_base_cost_pepecoin", fmt::format("{}", kBurnBaseCostPepecoin)},
      {"burn_cost_step_pepecoin", fmt::format("{}", kBurnCostStepPepecoin)},
      {"stake_acquisition_pepecoin", fmt::format("{}", kStakeAcquisitionPepecoin)},
      {"stake_lock_blocks", fmt::format("{}", kStakeLockBlocks)},
      {"max_validators_per_brain", fmt::format("{}", kMaxValidatorsPerBrain)},
      {"max_miners_per_brain", fmt::format("{}", kMaxMinersPerBrain)},
      {"registration_fee", fmt::format("{}", kRegistrationFeeTokens)},
      {"owner_fraction", fmt::format("{}", kOwnerFraction)},
      {"validator_share_of_nodes", fmt::format("{}", kValidatorShareOfNodes)},
      {"stake_cap_fraction", fmt::format("{}", kStakeCapFraction)},
      {"gigabrain_stake_fraction", fmt::format("{}", kGigaBrainStakeFraction)},
      {"top_performer_fraction", fmt::format("{}", kTopPerformerFraction)},
      {"active_validator_percentile", fmt::format("{}", kActiveValidatorPercentile)},
      {"bonus_pool_fraction", fmt::format("{}", kBonusPoolFraction)},
      {"sigmoid_lambda", fmt::format("{}", kSigmoidLambda)},
      {"quant_levels", fmt::format("{}", kQuantLevels)},
      {"adaptive_threshold", fmt::format("{}", kAdaptiveThreshold)},
      {"scale_factor", fmt::format("{}", kScaleFactor)},
  };
}

}  // namespace basedlab::defaults
