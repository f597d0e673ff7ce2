#pragma once

// Protocol constants used as defaults throughout the library. Every report
// written by the simulator echoes this table in its header.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace basedlab::defaults {

// Emission
inline constexpr std::int64_t kGenesisBlockRewardTokens = 10;
inline constexpr std::int64_t kBlockTimeSeconds = 10;
inline constexpr std::int64_t kBlocksPerDay = 86'400 / kBlockTimeSeconds;   // 8,640
inline constexpr std::int64_t kBlocksPerYear = 365 * kBlocksPerDay;         // 3,153,600
inline constexpr std::int64_t kBetaClockBlocksPerYear = 3'155'760;

// Brain acquisition
inline constexpr int kMaxBrains = 1024;
inline constexpr std::int64_t kBurnBaseCostPepecoin = 1'000;
inline constexpr std::int64_t kBurnCostStepPepecoin = 200;
inline constexpr std::int64_t kPrintedTotalBurnPepecoin = 107'563'530;
inline constexpr std::int64_t kStakeAcquisitionPepecoin = 100'000;
inline constexpr std::int64_t kStakeLockDays = 90;
inline constexpr std::int64_t kStakeLockBlocks = kStakeLockDays * kBlocksPerDay;  // 777,600

// Brain operation
inline constexpr int kMaxValidatorsPerBrain = 256;
inline constexpr int kMaxMinersPerBrain = 1792;
inline constexpr std::int64_t kRegistrationFeeTokens = 100;
inline constexpr double kOwnerFraction = 0.25;
inline constexpr double kValidatorShareOfNodes = 0.5;
inline constexpr double kStakeCapFraction = 0.005;
inline constexpr double kGigaBrainStakeFraction = 0.005;
inline constexpr double kTopPerformerFraction = 0.30;
inline constexpr double kActiveValidatorPercentile = 0.70;
inline constexpr double kBonusPoolFraction = 0.0;

// Consensus
inline constexpr double kSigmoidLambda = 10.0;
inline constexpr double kConsensusStakeThreshold = 0.5;

// Cerberus squeezing pipeline
inline constexpr int kQuantLevels = 256;
inline constexpr double kAdaptiveThreshold = 0.1;
inline constexpr double kScaleFactor = 0.5;

// Administrative brain ids operated by the network maintainers.
inline const std::vector<int>& reserved_brain_ids() {
  static const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 47};
  return ids;
}

/// Ordered key/value listing of every constant above.
std::vector<std::pair<std::string, std::string>> table();

}  // namespace basedlab::defaults
