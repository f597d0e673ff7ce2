#include <gtest/gtest.h>

#include <random>

#include "basedlab/econ.hpp"
#include "basedlab/errors.hpp"
#include "support/oracles.hpp"

using namespace basedlab;
using econ::BrainStakeProfile;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Validation;
}

TokenAmount tok(const char* s) { return TokenAmount::parse(s); }

}  // namespace

TEST(Emission, BlockRewardHalvesYearly) {
  const econ::EmissionSchedule s;
  for (int y = 1; y <= 30; ++y) EXPECT_EQ(econ::block_reward(s, y).base_units(), oracle::block_reward_units(y)) << y;
  EXPECT_EQ(econ::block_reward(s, 63).base_units(), 0);
  EXPECT_EQ(econ::block_reward(s, 1000).base_units(), 0);
  EXPECT_EQ(kind_of([&] { econ::block_reward(s, 0); }), ErrorKind::Domain);
}

TEST(Emission, MatchesPublishedSchedule) {
  const econ::EmissionSchedule s;
  for (const auto& row : oracle::published_emissions()) {
    EXPECT_EQ(econ::block_reward(s, row.year).base_units(), oracle::decimal_units(row.block_reward));
    EXPECT_EQ(econ::annual_emission(s, row.year).base_units(), oracle::decimal_units(row.annual_emission));
  }
}

TEST(Emission, YearBoundaries) {
  const econ::EmissionSchedule s;
  EXPECT_EQ(econ::year_of_block(s, 0), 1);
  EXPECT_EQ(econ::year_of_block(s, oracle::kBlocksPerYear - 1), 1);
  EXPECT_EQ(econ::year_of_block(s, oracle::kBlocksPerYear), 2);
  EXPECT_EQ(econ::emission_at_block(s, oracle::kBlocksPerYear - 1), TokenAmount::from_tokens(10));
  EXPECT_EQ(econ::emission_at_block(s, oracle::kBlocksPerYear), TokenAmount::from_tokens(5));
  EXPECT_EQ(kind_of([&] { econ::emission_at_block(s, -1); }), ErrorKind::Domain);
}

TEST(Burn, CostCurveAndCap) {
  EXPECT_EQ(econ::burn_cost(0), TokenAmount::from_tokens(1000));
  EXPECT_EQ(econ::burn_cost(1), TokenAmount::from_tokens(1200));
  EXPECT_EQ(econ::burn_cost(1023), TokenAmount::from_tokens(205'600));
  EXPECT_EQ(kind_of([] { econ::burn_cost(1024); }), ErrorKind::Capacity);
}

TEST(Burn, CumulativeMatchesSeriesSum) {
  for (int n : {0, 1, 2, 10, 500, 1023, 1024})
    EXPECT_EQ(econ::cumulative_burn(n), TokenAmount::from_tokens(oracle::burn_total_pepecoin(n))) << n;
  EXPECT_EQ(econ::cumulative_burn(1024), TokenAmount::from_tokens(105'779'200));
}

TEST(Split, OwnerQuarter) {
  const auto s = econ::split_reward(TokenAmount::from_tokens(10), 0.25);
  EXPECT_EQ(s.owner, tok("2.5"));
  EXPECT_EQ(s.nodes, tok("7.5"));
  EXPECT_EQ(kind_of([] { econ::split_reward(TokenAmount::from_tokens(1), 1.5); }), ErrorKind::Domain);
}

TEST(Split, ConservesRandomTotals) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> units(0, 1'000'000'000'000'000);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const auto total = TokenAmount::from_base_units(units(rng));
    const auto s = econ::split_reward(total, frac(rng));
    EXPECT_EQ(s.nodes + s.owner, total);
    EXPECT_GE(s.owner.base_units(), 0);
  }
}

TEST(Distribution, EqualBrainsShareEqually) {
  std::vector<BrainStakeProfile> p(1024);
  for (int i = 0; i < 1024; ++i) p[i] = {i, TokenAmount::from_tokens(1000), 1.0, 0.25};
  const auto out = econ::distribute_block_reward(p, TokenAmount::from_tokens(10));
  for (const auto& a : out) EXPECT_EQ(a.base_units(), 9'765'625);
}

TEST(Distribution, ConservesRewardOverRandomProfiles) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> stake(0, 1'000'000);
  std::uniform_real_distribution<double> perf(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<BrainStakeProfile> p(1 + trial % 40);
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = {static_cast<int>(i), TokenAmount::from_tokens(stake(rng)), perf(rng), 0.25};
    p[0].total_stake = TokenAmount::from_tokens(10);
    p[0].performance = 0.5;
    econ::DistributionOptions opts;
    opts.bonus_pool_fraction = trial % 2 ? 0.1 : 0.0;
    const auto reward = TokenAmount::from_base_units(10'000'000'000 + trial);
    const auto out = econ::distribute_block_reward(p, reward, opts);
    TokenAmount sum;
    for (const auto& a : out) sum += a;
    EXPECT_EQ(sum, reward);
  }
}

TEST(Distribution, CappedBrainGainsNothingFromMoreStake) {
  std::vector<BrainStakeProfile> p{{0, TokenAmount::from_tokens(10'000), 1.0, 0.25},
                                   {1, TokenAmount::from_tokens(1'000'000), 1.0, 0.25},
                                   {2, TokenAmount::from_tokens(1'000'000), 0.8, 0.25}};
  econ::DistributionOptions opts;
  opts.network_stake = TokenAmount::from_tokens(100'000'000);  // cap = 500,000
  const auto before = econ::distribute_block_reward(p, TokenAmount::from_tokens(10), opts);
  p[1].total_stake = TokenAmount::from_tokens(9'000'000);
  const auto after = econ::distribute_block_reward(p, TokenAmount::from_tokens(10), opts);
  EXPECT_EQ(before, after);
}

TEST(Distribution, BonusGoesToTopPerformers) {
  std::vector<BrainStakeProfile> p;
  for (int i = 0; i < 10; ++i) p.push_back({i, TokenAmount::from_tokens(100), 0.1 * (i + 1), 0.25});
  econ::DistributionOptions opts;
  opts.bonus_pool_fraction = 0.3;
  opts.stake_cap_fraction = 1.0;
  const auto with = econ::distribute_block_reward(p, TokenAmount::from_tokens(10), opts);
  opts.bonus_pool_fraction = 0.0;
  const auto without = econ::distribute_block_reward(p, TokenAmount::from_tokens(7), opts);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(with[i], without[i]) << i;
  for (int i = 7; i < 10; ++i) EXPECT_EQ(with[i], without[i] + TokenAmount::from_tokens(1)) << i;
}

TEST(Distribution, ZeroStakeIsDegenerate) {
  std::vector<BrainStakeProfile> p{{0, TokenAmount{}, 1.0, 0.25}};
  EXPECT_EQ(kind_of([&] { econ::distribute_block_reward(p, TokenAmount::from_tokens(10)); }), ErrorKind::Degenerate);
}

TEST(StakeCap, HalfPercent) {
  EXPECT_EQ(econ::stake_cap(TokenAmount::from_tokens(1000), 0.005), TokenAmount::from_tokens(5));
}

TEST(ActiveValidators, NearestRankSeventiethPercentile) {
  std::vector<TokenAmount> s;
  for (int v : {50, 10, 100, 30, 70, 20, 90, 40, 60, 80}) s.push_back(TokenAmount::from_tokens(v));
  EXPECT_EQ(econ::active_validators(s), (std::vector<std::size_t>{2, 4, 6, 9}));
  EXPECT_EQ(econ::active_validators(std::vector<TokenAmount>{TokenAmount::from_tokens(5)}),
            (std::vector<std::size_t>{0}));
  EXPECT_TRUE(econ::active_validators({}).empty());
}

TEST(ActiveValidators, TiesAtThresholdAreIncluded) {
  std::vector<TokenAmount> s(5, TokenAmount::from_tokens(7));
  EXPECT_EQ(econ::active_validators(s).size(), 5u);
}

TEST(ProjectStake, NineteenPercent) {
  EXPECT_EQ(econ::project_stake(TokenAmount::from_tokens(10'000), 0.19, 1), TokenAmount::from_tokens(11'900));
  EXPECT_EQ(econ::project_stake(TokenAmount::from_tokens(10'000), 0.19, 2), TokenAmount::from_tokens(14'161));
  EXPECT_EQ(econ::project_stake(TokenAmount::from_tokens(10'000), 0.19, 0), TokenAmount::from_tokens(10'000));
}

TEST(Pricing, CatalogQuotes) {
  const auto& gpt4 = econ::find_model("GPT-4");
  EXPECT_EQ(econ::quote_compute_cost(gpt4, 1000, 1000), tok("0.09"));
  EXPECT_EQ(&econ::find_model("openai: gpt-4"), &gpt4);
  EXPECT_EQ(econ::model_catalog().size(), 10u);
  EXPECT_EQ(econ::quote_compute_cost(econ::find_model("Claude v2"), 2000, 500), tok("0.028"));
  EXPECT_EQ(kind_of([&] { econ::quote_compute_cost(gpt4, 9000, 0); }), ErrorKind::ContextExceeded);
  EXPECT_EQ(kind_of([] { econ::find_model("gpt-7"); }), ErrorKind::NotFound);
}
