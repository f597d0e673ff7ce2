#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "basedlab/consensus.hpp"
#include "basedlab/defaults.hpp"
#include "basedlab/econ.hpp"
#include "basedlab/routing.hpp"
#include "basedlab/token_amount.hpp"

namespace basedlab::sim {

using BrainId = int;
using PeerId = std::int64_t;
using AccountId = std::string;
using routing::Embedding;

enum class Acquisition { Burn, Stake, Admin };
enum class Role { Miner, Validator };
enum class Ballot { Up, Down, Abstain };

const char* to_string(Acquisition a);
const char* to_string(Role r);
const char* to_string(Ballot b);

struct Account {
  TokenAmount based;
  TokenAmount pepecoin;
};

struct Registration {
  TokenAmount fee_paid;
  std::int64_t block = 0;
};

struct Brain {
  BrainId id = 0;
  Acquisition acquisition = Acquisition::Burn;
  AccountId owner;
  std::int64_t acquired_at = 0;
  /// First block at which a stake-acquired brain earns and may be deactivated.
  std::int64_t lock_until = 0;
  TokenAmount locked_pepecoin;
  TokenAmount registration_fee = TokenAmount::from_tokens(defaults::kRegistrationFeeTokens);
  TokenAmount memorize_fee;
  double owner_fraction = defaults::kOwnerFraction;
  double validator_share = defaults::kValidatorShareOfNodes;
  /// Performance per simulated year; the last value persists.
  std::vector<double> performance{1.0};
  std::set<PeerId> memorized;
  std::map<PeerId, Registration> validators;
  std::map<PeerId, Registration> miners;
  std::map<PeerId, double> credits;
  std::map<std::pair<PeerId, PeerId>, double> weight_overrides;

  double performance_in_year(std::int64_t year) const;
  /// Registered validators then miners merged in ascending id order.
  std::vector<PeerId> members() const;
};

struct Peer {
  PeerId id = 0;
  Role role = Role::Miner;
  AccountId account;
  std::vector<Embedding> history;
  double quality = 1.0;
};

struct PositionKey {
  AccountId account;
  BrainId brain = 0;
  std::optional<PeerId> validator;

  auto operator<=>(const PositionKey&) const = default;
};

struct Event {
  std::int64_t block = 0;
  std::string kind;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

// Genesis description.

struct GenesisBrain {
  std::optional<BrainId> id;
  AccountId owner;
  Acquisition acquisition = Acquisition::Burn;
  TokenAmount registration_fee = TokenAmount::from_tokens(defaults::kRegistrationFeeTokens);
  TokenAmount memorize_fee;
  double owner_fraction = defaults::kOwnerFraction;
  double validator_share = defaults::kValidatorShareOfNodes;
  std::vector<double> performance{1.0};
};

struct GenesisPeer {
  Peer peer;
  std::vector<BrainId> brains;  // memorize + register at each
};

struct GenesisStake {
  AccountId account;
  BrainId brain = 0;
  std::optional<PeerId> validator;
  TokenAmount amount;
};

struct WeightEntry {
  BrainId brain = 0;
  PeerId from = 0;
  PeerId to = 0;
  double weight = 0.0;
};

// Commands that can be queued for a given block.

struct AcquireCmd { Acquisition method = Acquisition::Burn; AccountId account; };
struct DeactivateCmd { BrainId brain = 0; };
struct AddPeerCmd { Peer peer; };
struct MemorizeCmd { BrainId brain = 0; PeerId peer = 0; };
struct RegisterCmd { BrainId brain = 0; PeerId peer = 0; Role role = Role::Miner; };
struct SetFeeCmd { BrainId brain = 0; TokenAmount fee; };
struct SetWeightCmd { WeightEntry entry; };
struct SetPerformanceCmd { BrainId brain = 0; std::vector<double> performance; };
struct StakeCmd { AccountId account; BrainId brain = 0; std::optional<PeerId> validator; TokenAmount amount; };
struct UnstakeCmd { AccountId account; BrainId brain = 0; std::optional<PeerId> validator; TokenAmount amount; };
struct VoteCmd { std::string proposal; std::map<BrainId, Ballot> ballots; };
struct RouteCmd { BrainId brain = 0; std::vector<Embedding> items; };

using CommandOp = std::variant<AcquireCmd, DeactivateCmd, AddPeerCmd, MemorizeCmd, RegisterCmd, SetFeeCmd,
                               SetWeightCmd, SetPerformanceCmd, StakeCmd, UnstakeCmd, VoteCmd, RouteCmd>;

struct Command {
  std::int64_t at_block = 0;
  CommandOp op;
};

struct NetworkConfig {
  std::uint64_t seed = 0;
  econ::EmissionSchedule emission;
  consensus::BetaSchedule beta;
  double lambda = defaults::kSigmoidLambda;
  double bonus_pool_fraction = defaults::kBonusPoolFraction;
  double stake_cap_fraction = defaults::kStakeCapFraction;
  double tft_accuracy = 0.0;
  /// Rate for the year-end adaptive reweighting; 0 disables it.
  double reweight_rate = 0.0;
  /// Emit one event per block (large for long runs).
  bool log_blocks = false;

  std::map<AccountId, Account> accounts;
  std::vector<GenesisBrain> brains;
  std::vector<GenesisPeer> peers;
  std::vector<GenesisStake> stakes;
  std::vector<WeightEntry> weights;
  std::vector<Command> commands;
};

struct BlockReport {
  std::int64_t height = 0;
  TokenAmount minted;
  TokenAmount distributed;
  TokenAmount withheld;
};

struct VoteResult {
  bool passed = true;
  int gigabrains = 0;
  int up = 0;
  int down = 0;
  int abstain = 0;
  std::vector<BrainId> rejected_ballots;
};

struct BrainYear {
  BrainId brain = 0;
  TokenAmount reward;
  TokenAmount stake;
  double apy_realized = 0.0;
  bool gigabrain = false;
  std::vector<PeerId> consensus;
  double credits_total = 0.0;
};

struct YearSummary {
  std::int64_t year = 0;
  std::int64_t blocks = 0;
  TokenAmount minted;
  TokenAmount distributed;
  TokenAmount withheld;
  std::vector<BrainYear> brains;
};

/// Deterministic block-by-block network state machine. Each mutating
/// operation either succeeds completely or throws and leaves the state as it
/// was.
class Network {
 public:
  /// Builds the genesis state; genesis failures surface as ValidationError
  /// with a field path (e.g. "brains[3]").
  explicit Network(NetworkConfig config);

  BrainId acquire_brain(Acquisition method, const AccountId& account, std::optional<BrainId> id = {});
  void deactivate_brain(BrainId brain);
  void add_peer(Peer peer);
  void memorize(BrainId brain, PeerId peer);
  void register_peer(BrainId brain, PeerId peer, Role role);
  void set_registration_fee(BrainId brain, TokenAmount fee);
  void set_weight(const WeightEntry& entry);
  void set_performance(BrainId brain, std::vector<double> performance);
  void stake(const AccountId& account, BrainId brain, std::optional<PeerId> validator, TokenAmount amount);
  void unstake(const AccountId& account, BrainId brain, std::optional<PeerId> validator, TokenAmount amount);
  VoteResult vote(const std::string& proposal, const std::map<BrainId, Ballot>& ballots);
  routing::WorkAssignment route(BrainId brain, const std::vector<Embedding>& items);

  /// Runs one command, logging a "rejected" event instead of throwing on failure.
  bool apply(const Command& command);

  /// Pipeline: emission -> per-brain allocation -> owner/node split and
  /// validator/miner payouts -> credits -> queued commands for this block.
  BlockReport step_block();
  /// Steps `blocks` times; per-block reports are passed to `observer` if set.
  void run(std::int64_t blocks, const std::function<void(const BlockReport&)>& observer = {});
  /// Emits a summary for a trailing partial year, if any.
  void finish();

  std::set<BrainId> gigabrain_set() const;

  // Queries.
  std::int64_t height() const { return height_; }
  const NetworkConfig& config() const { return config_; }
  const std::map<AccountId, Account>& accounts() const { return accounts_; }
  const std::map<BrainId, Brain>& brains() const { return brains_; }
  const std::map<PeerId, Peer>& peers() const { return peers_; }
  const std::map<PositionKey, TokenAmount>& positions() const { return positions_; }
  const std::vector<Event>& events() const { return events_; }
  const std::vector<YearSummary>& years() const { return years_; }
  TokenAmount minted() const { return minted_; }
  TokenAmount distributed() const { return distributed_; }
  TokenAmount withheld() const { return withheld_; }
  TokenAmount burned_pepecoin() const { return burned_pepecoin_; }
  std::int64_t burn_issued() const { return burn_issued_; }
  int active_brain_count() const { return static_cast<int>(brains_.size()); }
  TokenAmount brain_stake(BrainId brain) const;
  TokenAmount validator_stake(BrainId brain, PeerId validator) const;
  TokenAmount network_stake() const;
  const Account& account(const AccountId& id) const;

  /// Peer weight matrix of a brain over members() order.
  consensus::WeightMatrix weight_matrix(BrainId brain) const;
  /// Members in the consensus set (empty when the brain has no peer stake).
  std::vector<PeerId> consensus_members(BrainId brain) const;

  nlohmann::json canonical_state() const;
  /// FNV-1a 64 of the canonical state serialization, as 16 hex digits.
  std::string digest() const;

 private:
  struct Payout;

  Brain& brain_ref(BrainId brain);
  const Brain& brain_ref(BrainId brain) const;
  Peer& peer_ref(PeerId peer);
  Account& account_ref(const AccountId& id);
  double generated_weight(BrainId brain, PeerId from, PeerId to) const;
  std::optional<BrainId> next_free_id() const;
  void log(std::string kind, nlohmann::json payload);
  void touch() { ++version_; }
  const Payout& payout_for(TokenAmount minted, std::int64_t year, double beta);
  void build_payout(Payout& plan, TokenAmount minted, std::int64_t year, double beta);
  void close_year(std::int64_t blocks_in_period);
  void apply_genesis();

  NetworkConfig config_;
  std::int64_t height_ = 0;
  std::map<AccountId, Account> accounts_;
  std::map<BrainId, Brain> brains_;
  std::map<PeerId, Peer> peers_;
  std::map<PositionKey, TokenAmount> positions_;
  std::vector<Event> events_;
  std::vector<YearSummary> years_;
  std::vector<Command> queue_;
  std::size_t next_command_ = 0;

  TokenAmount minted_, distributed_, withheld_, burned_pepecoin_;
  std::int64_t burn_issued_ = 0;

  // Running totals for the open year.
  std::int64_t year_start_ = 0;
  TokenAmount year_minted_, year_distributed_, year_withheld_;
  std::map<BrainId, TokenAmount> year_rewards_;

  bool genesis_ = true;
  std::uint64_t version_ = 0;
  std::shared_ptr<Payout> payout_;
};

}  // namespace basedlab::sim
