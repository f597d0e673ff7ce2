#include <gtest/gtest.h>

#include <random>

#include "basedlab/errors.hpp"
#include "basedlab/sim.hpp"

using namespace basedlab;
using namespace basedlab::sim;

namespace {

TokenAmount tok(std::int64_t n) { return TokenAmount::from_tokens(n); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Validation;
}

// One brain (id 8) owned by "owner", one validator (1) and one miner (2).
NetworkConfig small_network() {
  NetworkConfig c;
  c.accounts = {{"owner", {tok(0), tok(10'000)}},
                {"val", {tok(1'000), {}}},
                {"miner", {tok(1'000), {}}},
                {"staker", {tok(5'000), {}}}};
  GenesisBrain b;
  b.id = 8;
  b.owner = "owner";
  c.brains.push_back(b);
  c.peers.push_back({Peer{1, Role::Validator, "val", {}, 1.0}, {8}});
  c.peers.push_back({Peer{2, Role::Miner, "miner", {}, 1.0}, {8}});
  c.stakes.push_back({"staker", 8, 1, tok(1'000)});
  return c;
}

TokenAmount total_based(const Network& n) {
  TokenAmount t;
  for (const auto& [id, a] : n.accounts()) t += a.based;
  for (const auto& [k, v] : n.positions()) t += v;
  return t;
}

}  // namespace

TEST(Genesis, EmptyBrainListIsValid) {
  Network n(NetworkConfig{});
  const BlockReport r = n.step_block();
  EXPECT_EQ(r.minted, tok(10));
  EXPECT_EQ(r.withheld, tok(10));
  EXPECT_EQ(r.distributed, TokenAmount{});
}

TEST(Genesis, RejectsMoreThan1024Brains) {
  NetworkConfig c;
  c.accounts["a"] = {{}, {}};
  c.brains.assign(1025, GenesisBrain{std::nullopt, "a", Acquisition::Admin});
  try {
    Network n(c);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field_path(), "brains");
  }
}

TEST(Genesis, ReportsFieldPath) {
  NetworkConfig c = small_network();
  c.stakes.push_back({"nobody", 8, std::nullopt, tok(1)});
  try {
    Network n(c);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field_path(), "stakes[1]");
  }
}

TEST(Genesis, SameConfigSameState) {
  Network a(small_network()), b(small_network());
  a.run(50);
  b.run(50);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.canonical_state(), b.canonical_state());
}

TEST(Acquire, BurnDestroysRisingPepecoin) {
  NetworkConfig c;
  c.accounts["a"] = {{}, tok(5'000)};
  Network n(c);
  const BrainId first = n.acquire_brain(Acquisition::Burn, "a");
  EXPECT_EQ(n.account("a").pepecoin, tok(4'000));
  EXPECT_EQ(n.burned_pepecoin(), tok(1'000));
  n.acquire_brain(Acquisition::Burn, "a");
  EXPECT_EQ(n.burned_pepecoin(), tok(2'200));
  EXPECT_EQ(first, 7);  // lowest id outside the reserved set
  n.acquire_brain(Acquisition::Burn, "a");
  EXPECT_EQ(n.account("a").pepecoin, tok(1'400));
  const auto before = n.digest();
  EXPECT_EQ(kind_of([&] { n.acquire_brain(Acquisition::Burn, "a"); }), ErrorKind::InsufficientFunds);
  EXPECT_EQ(n.digest(), before);
}

TEST(Acquire, StakeLocksFor90Days) {
  NetworkConfig c;
  c.accounts["a"] = {{}, tok(100'000)};
  Network n(c);
  const BrainId id = n.acquire_brain(Acquisition::Stake, "a");
  EXPECT_EQ(n.account("a").pepecoin, TokenAmount{});
  EXPECT_EQ(n.brains().at(id).locked_pepecoin, tok(100'000));
  EXPECT_EQ(n.brains().at(id).lock_until, 777'600);
  EXPECT_EQ(kind_of([&] { n.deactivate_brain(id); }), ErrorKind::NotPermitted);
}

TEST(Acquire, CapacityOf1024ActiveBrains) {
  NetworkConfig c;
  c.accounts["a"] = {{}, tok(200'000'000)};
  Network n(c);
  for (int i = 0; i < 1024; ++i) n.acquire_brain(Acquisition::Burn, "a");
  EXPECT_EQ(n.active_brain_count(), 1024);
  EXPECT_EQ(n.burned_pepecoin(), tok(105'779'200));
  EXPECT_EQ(kind_of([&] { n.acquire_brain(Acquisition::Burn, "a"); }), ErrorKind::Capacity);
  EXPECT_EQ(kind_of([&] { n.acquire_brain(Acquisition::Stake, "a"); }), ErrorKind::Capacity);
}

TEST(Acquire, AdminBrainsOnlyAtGenesis) {
  NetworkConfig c;
  c.accounts["ops"] = {{}, {}};
  c.brains.push_back(GenesisBrain{0, "ops", Acquisition::Admin});
  Network n(c);
  EXPECT_EQ(n.brains().at(0).acquisition, Acquisition::Admin);
  EXPECT_EQ(kind_of([&] { n.acquire_brain(Acquisition::Admin, "ops"); }), ErrorKind::NotPermitted);
}

TEST(Deactivate, StakedBrainAfterLockReturnsPepecoin) {
  NetworkConfig c;
  c.accounts["a"] = {tok(10), tok(100'000)};
  c.brains.push_back(GenesisBrain{9, "a", Acquisition::Stake});
  c.stakes.push_back({"a", 9, std::nullopt, tok(10)});
  Network n(c);
  c.emission.blocks_per_year = 1'000'000'000;
  n.run(777'600);
  EXPECT_EQ(n.active_brain_count(), 1);
  n.deactivate_brain(9);
  EXPECT_EQ(n.active_brain_count(), 0);
  EXPECT_EQ(n.account("a").pepecoin, tok(100'000));
  EXPECT_TRUE(n.positions().empty());
  EXPECT_GE(n.account("a").based, tok(10));
}

TEST(Deactivate, BurnBrainIsPermanent) {
  Network n(small_network());
  EXPECT_EQ(kind_of([&] { n.deactivate_brain(8); }), ErrorKind::NotPermitted);
  EXPECT_EQ(kind_of([&] { n.deactivate_brain(99); }), ErrorKind::NotFound);
}

TEST(Deactivate, StakedBrainEarnsNothingWhileLocked) {
  NetworkConfig c = small_network();
  c.accounts["b"] = {{}, tok(100'000)};
  c.brains.push_back(GenesisBrain{9, "b", Acquisition::Stake});
  c.stakes.push_back({"staker", 9, std::nullopt, tok(1'000)});
  Network n(c);
  n.run(10);
  EXPECT_EQ(n.account("b").based, TokenAmount{});
}

TEST(Memorize, DuplicateRejected) {
  Network n(small_network());
  EXPECT_EQ(kind_of([&] { n.memorize(8, 1); }), ErrorKind::Duplicate);
}

TEST(Memorize, UnaffordableFeeLeavesStateUnchanged) {
  NetworkConfig c = small_network();
  c.brains[0].memorize_fee = tok(5);
  c.accounts["poor"] = {tok(3), {}};
  c.peers.push_back({Peer{3, Role::Miner, "poor", {}, 1.0}, {}});
  c.accounts["miner"].based = tok(1'005);
  c.accounts["val"].based = tok(1'005);
  Network n(c);
  const auto before = n.digest();
  EXPECT_EQ(kind_of([&] { n.memorize(8, 3); }), ErrorKind::InsufficientFunds);
  EXPECT_EQ(n.digest(), before);
}

TEST(Register, RequiresMemorize) {
  NetworkConfig c = small_network();
  c.peers.push_back({Peer{3, Role::Miner, "miner", {}, 1.0}, {}});
  Network n(c);
  EXPECT_EQ(kind_of([&] { n.register_peer(8, 3, Role::Miner); }), ErrorKind::NotPermitted);
  n.memorize(8, 3);
  EXPECT_EQ(kind_of([&] { n.register_peer(8, 3, Role::Validator); }), ErrorKind::Domain);
  n.register_peer(8, 3, Role::Miner);
  EXPECT_EQ(n.brains().at(8).miners.size(), 2u);
}

TEST(Register, ValidatorAndMinerCaps) {
  NetworkConfig c;
  c.accounts = {{"o", {{}, tok(1'000)}}, {"pool", {tok(1'000'000), {}}}};
  GenesisBrain b;
  b.id = 8;
  b.owner = "o";
  b.registration_fee = TokenAmount{};
  c.brains.push_back(b);
  Network n(c);
  for (PeerId p = 1; p <= 257; ++p) {
    n.add_peer(Peer{p, Role::Validator, "pool", {}, 1.0});
    n.memorize(8, p);
    if (p <= 256)
      n.register_peer(8, p, Role::Validator);
    else
      EXPECT_EQ(kind_of([&] { n.register_peer(8, p, Role::Validator); }), ErrorKind::Capacity);
  }
  for (PeerId p = 1001; p <= 2793; ++p) {
    n.add_peer(Peer{p, Role::Miner, "pool", {}, 1.0});
    n.memorize(8, p);
    if (p <= 2792)
      n.register_peer(8, p, Role::Miner);
    else
      EXPECT_EQ(kind_of([&] { n.register_peer(8, p, Role::Miner); }), ErrorKind::Capacity);
  }
  EXPECT_EQ(n.brains().at(8).validators.size(), 256u);
  EXPECT_EQ(n.brains().at(8).miners.size(), 1792u);
}

TEST(Register, FeeRaiseGrandfathersExistingPeers) {
  NetworkConfig c = small_network();
  c.peers.push_back({Peer{3, Role::Miner, "miner", {}, 1.0}, {}});
  Network n(c);
  const auto before = n.brains().at(8).miners.at(2).fee_paid;
  n.set_registration_fee(8, tok(200));
  EXPECT_EQ(n.brains().at(8).miners.at(2).fee_paid, before);
  const TokenAmount bal = n.account("miner").based;
  n.memorize(8, 3);
  n.register_peer(8, 3, Role::Miner);
  EXPECT_EQ(n.account("miner").based, bal - tok(200));
  EXPECT_EQ(n.brains().at(8).miners.at(2).fee_paid, tok(100));
}

TEST(Register, FeeGoesToOwner) {
  Network n(small_network());
  EXPECT_EQ(n.account("owner").based, tok(200));
  EXPECT_EQ(n.account("val").based, tok(900));
}

TEST(Stake, PositionsArePerBrain) {
  NetworkConfig c = small_network();
  c.accounts["o2"] = {{}, tok(10'000)};
  c.brains.push_back(GenesisBrain{2, "o2"});
  c.brains.push_back(GenesisBrain{11, "o2"});
  c.accounts["u"] = {tok(150), {}};
  Network n(c);
  n.stake("u", 2, std::nullopt, tok(100));
  EXPECT_EQ(n.positions().at(PositionKey{"u", 2, std::nullopt}), tok(100));
  EXPECT_EQ(n.brain_stake(11), TokenAmount{});
  EXPECT_EQ(kind_of([&] { n.stake("u", 11, std::nullopt, tok(100)); }), ErrorKind::InsufficientFunds);
  EXPECT_EQ(kind_of([&] { n.unstake("u", 2, std::nullopt, tok(101)); }), ErrorKind::InsufficientFunds);
  EXPECT_EQ(kind_of([&] { n.stake("u", 2, 2, tok(1)); }), ErrorKind::NotFound);  // 2 is a miner
  n.unstake("u", 2, std::nullopt, tok(100));
  EXPECT_EQ(n.account("u").based, tok(150));
}

TEST(Stake, TransfersConserveBalances) {
  Network n(small_network());
  const TokenAmount before = total_based(n);
  n.stake("val", 8, 1, tok(300));
  n.unstake("staker", 8, 1, tok(250));
  n.set_registration_fee(8, tok(1));
  EXPECT_EQ(total_based(n), before);
}

TEST(Block, SingleBrainSplitAtGenesis) {
  Network n(small_network());
  const TokenAmount owner_before = n.account("owner").based;
  const BlockReport r = n.step_block();
  EXPECT_EQ(r.minted, tok(10));
  EXPECT_EQ(r.distributed + r.withheld, tok(10));
  EXPECT_EQ(n.account("owner").based - owner_before, TokenAmount::parse("2.5"));
  TokenAmount nodes;
  for (const char* a : {"staker", "miner", "val"}) nodes += n.account(a).based;
  const Network fresh(small_network());
  TokenAmount nodes_before;
  for (const char* a : {"staker", "miner", "val"}) nodes_before += fresh.account(a).based;
  EXPECT_EQ(nodes - nodes_before + r.withheld, TokenAmount::parse("7.5"));
}

TEST(Block, ZeroStakeNetworkWithholdsEmission) {
  NetworkConfig c = small_network();
  c.stakes.clear();
  Network n(c);
  const BlockReport r = n.step_block();
  EXPECT_EQ(r.withheld, tok(10));
  EXPECT_EQ(n.withheld(), tok(10));
}

TEST(Block, ConservationEveryBlock) {
  NetworkConfig c = small_network();
  c.emission.blocks_per_year = 100;
  c.beta.blocks_per_year = 100;
  c.tft_accuracy = 0.7;
  c.reweight_rate = 0.1;
  Network n(c);
  TokenAmount minted;
  n.run(450, [&](const BlockReport& r) {
    EXPECT_EQ(r.minted, r.distributed + r.withheld);
    minted += r.minted;
  });
  EXPECT_EQ(minted, n.minted());
  EXPECT_EQ(n.years().size(), 4u);
  EXPECT_EQ(n.years()[1].minted, tok(500));
}

TEST(Block, CappedBrainGainsNothingFromMoreStake) {
  auto make = [](std::int64_t extra) {
    NetworkConfig c = small_network();
    c.accounts["o2"] = {{}, tok(10'000)};
    c.accounts["whale"] = {tok(1'000'000), {}};
    for (int id : {20, 21, 22}) c.brains.push_back(GenesisBrain{id, "o2"});
    c.stakes.push_back({"whale", 20, std::nullopt, tok(400'000)});
    c.stakes.push_back({"whale", 21, std::nullopt, tok(300'000)});
    c.stakes.push_back({"whale", 22, std::nullopt, tok(200'000)});
    return std::pair{c, extra};
  };
  // Brain 20 is far above the 0.5% cap; the cap itself must stay fixed, so the
  // comparison pins network stake by moving stake between two capped brains.
  auto [c1, e1] = make(0);
  auto [c2, e2] = make(0);
  c2.stakes[1].amount = tok(200'000);
  c2.stakes[3].amount = tok(400'000);
  (void)e1;
  (void)e2;
  Network a(c1), b(c2);
  a.step_block();
  b.step_block();
  EXPECT_EQ(a.account("o2").based, b.account("o2").based);
}

TEST(Governance, GigaBrainThresholdInclusive) {
  NetworkConfig c;
  c.accounts = {{"o", {{}, tok(10'000)}}, {"s", {tok(1'000'000), {}}}};
  for (int id : {10, 11}) c.brains.push_back(GenesisBrain{id, "o"});
  c.stakes.push_back({"s", 10, std::nullopt, tok(5)});
  c.stakes.push_back({"s", 11, std::nullopt, tok(995)});
  Network n(c);
  EXPECT_EQ(n.gigabrain_set(), (std::set<BrainId>{10, 11}));
  n.stake("s", 11, std::nullopt, TokenAmount::from_base_units(1));
  EXPECT_EQ(n.gigabrain_set(), (std::set<BrainId>{11}));
}

TEST(Governance, EmptyWithoutStakeAndSingletonWithOneStakedBrain) {
  NetworkConfig c = small_network();
  c.stakes.clear();
  Network n(c);
  EXPECT_TRUE(n.gigabrain_set().empty());
  n.stake("staker", 8, std::nullopt, tok(1));
  EXPECT_EQ(n.gigabrain_set(), (std::set<BrainId>{8}));
}

TEST(Governance, VotingRule) {
  NetworkConfig c;
  c.accounts = {{"o", {{}, tok(10'000)}}, {"s", {tok(1'000'000), {}}}};
  for (int id : {10, 11, 12, 13, 14}) c.brains.push_back(GenesisBrain{id, "o"});
  for (int id : {10, 11, 12}) c.stakes.push_back({"s", id, std::nullopt, tok(id == 10 ? 10'000 : 100)});
  Network n(c);
  EXPECT_EQ(n.gigabrain_set().size(), 3u);
  EXPECT_TRUE(n.vote("p", {}).passed);
  const auto fail = n.vote("p", {{10, Ballot::Down}, {11, Ballot::Down}});
  EXPECT_FALSE(fail.passed);
  EXPECT_EQ(fail.down, 2);  // brain 10 holds most stake but votes once
  const auto rejected = n.vote("p", {{13, Ballot::Down}});
  EXPECT_TRUE(rejected.passed);
  EXPECT_EQ(rejected.rejected_ballots, (std::vector<BrainId>{13}));
  EXPECT_EQ(n.events().back().kind, "vote");
  EXPECT_EQ(n.events()[n.events().size() - 2].kind, "ballot_rejected");

  n.stake("s", 13, std::nullopt, tok(100));
  EXPECT_EQ(n.gigabrain_set().size(), 4u);
  EXPECT_TRUE(n.vote("p", {{10, Ballot::Down}, {11, Ballot::Down}, {12, Ballot::Up}}).passed);
}

TEST(Commands, RejectedCommandsAreLogged) {
  NetworkConfig c = small_network();
  c.commands.push_back({1, DeactivateCmd{8}});
  c.commands.push_back({1, StakeCmd{"staker", 8, std::nullopt, tok(1)}});
  Network n(c);
  n.run(3);
  const auto& ev = n.events();
  auto it = std::find_if(ev.begin(), ev.end(), [](const Event& e) { return e.kind == "rejected"; });
  ASSERT_NE(it, ev.end());
  EXPECT_EQ(it->block, 1);
  EXPECT_EQ((it + 1)->kind, "stake");
}

TEST(Commands, RouteAppendsToMinerHistory) {
  NetworkConfig c = small_network();
  c.peers.push_back({Peer{3, Role::Miner, "miner", {{1.0, 1.0}}, 1.0}, {8}});
  c.accounts["miner"].based = tok(2'000);
  Network n(c);
  const auto a = n.route(8, {{0.9, 0.9}, {5.0, 5.0}});
  EXPECT_EQ(a.at(3), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(n.peers().at(3).history.size(), 3u);
}

TEST(Capacity, RandomCommandSequencesStayWithinLimits) {
  std::mt19937_64 rng(67);
  NetworkConfig c;
  c.accounts = {{"rich", {tok(10'000'000), tok(400'000'000)}}};
  c.emission.blocks_per_year = 50;
  Network n(c);
  std::vector<BrainId> brains;
  PeerId next_peer = 1;
  for (int step = 0; step < 6000; ++step) {
    Command cmd{n.height(), {}};
    const auto pick_brain = [&]() -> BrainId {
      return brains.empty() ? 0 : brains[rng() % brains.size()];
    };
    switch (rng() % 8) {
      case 0:
      case 1:
        cmd.op = AcquireCmd{rng() % 4 ? Acquisition::Burn : Acquisition::Stake, "rich"};
        break;
      case 2:
        cmd.op = DeactivateCmd{pick_brain()};
        break;
      case 3: {
        const Role r = rng() % 3 ? Role::Miner : Role::Validator;
        cmd.op = AddPeerCmd{Peer{next_peer++, r, "rich", {}, 1.0}};
        break;
      }
      case 4:
      case 5: {
        const PeerId p = 1 + static_cast<PeerId>(rng() % static_cast<std::uint64_t>(next_peer));
        const BrainId b = pick_brain();
        n.apply({n.height(), MemorizeCmd{b, p}});
        cmd.op = RegisterCmd{b, p, n.peers().count(p) ? n.peers().at(p).role : Role::Miner};
        break;
      }
      case 6:
        cmd.op = StakeCmd{"rich", pick_brain(), std::nullopt, tok(1 + static_cast<std::int64_t>(rng() % 100))};
        break;
      default:
        n.step_block();
        continue;
    }
    n.apply(cmd);
    brains.clear();
    for (const auto& [id, b] : n.brains()) brains.push_back(id);
    ASSERT_LE(n.active_brain_count(), 1024);
    for (const auto& [id, b] : n.brains()) {
      ASSERT_LE(b.validators.size(), 256u);
      ASSERT_LE(b.miners.size(), 1792u);
    }
    for (const auto& [id, a] : n.accounts()) {
      ASSERT_GE(a.based.base_units(), 0);
      ASSERT_GE(a.pepecoin.base_units(), 0);
    }
  }
}
