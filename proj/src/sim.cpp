#include "basedlab/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "basedlab/apportion.hpp"
#include "basedlab/errors.hpp"

namespace basedlab::sim {

using nlohmann::json;

const char* to_string(Acquisition a) {
  switch (a) {
    case Acquisition::Burn: return "burn";
    case Acquisition::Stake: return "stake";
    case Acquisition::Admin: return "admin";
  }
  return "?";
}

const char* to_string(Role r) { return r == Role::Validator ? "validator" : "miner"; }

const char* to_string(Ballot b) {
  switch (b) {
    case Ballot::Up: return "up";
    case Ballot::Down: return "down";
    case Ballot::Abstain: return "abstain";
  }
  return "?";
}

double Brain::performance_in_year(std::int64_t year) const {
  if (performance.empty()) return 0.0;
  const auto idx = std::clamp<std::int64_t>(year - 1, 0, static_cast<std::int64_t>(performance.size()) - 1);
  return performance[static_cast<std::size_t>(idx)];
}

std::vector<PeerId> Brain::members() const {
  std::vector<PeerId> out;
  out.reserve(validators.size() + miners.size());
  for (const auto& [id, reg] : validators) out.push_back(id);
  for (const auto& [id, reg] : miners) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

json Event::to_json() const { return json{{"block", block}, {"kind", kind}, {"payload", payload}}; }

struct Network::Payout {
  std::uint64_t version = std::numeric_limits<std::uint64_t>::max();
  TokenAmount minted;
  std::int64_t year = 0;
  double beta = -1.0;
  std::int64_t valid_until = 0;  // next stake-lock expiry

  std::vector<std::pair<Account*, TokenAmount>> transfers;
  std::vector<std::pair<TokenAmount*, TokenAmount>> brain_rewards;
  std::vector<std::pair<double*, double>> credits;
  TokenAmount distributed;
  TokenAmount withheld;
};

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_fraction(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(path, "must lie in [0,1]");
}

void require_performance(const std::vector<double>& perf) {
  if (perf.empty()) throw Error(ErrorKind::Domain, "performance series is empty");
  for (double p : perf)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::Domain, "performance values must lie in [0,1]");
}

json optional_id(const std::optional<PeerId>& v) { return v ? json(*v) : json(nullptr); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  if (config_.emission.blocks_per_year <= 0) throw ValidationError("blocks_per_year", "must be positive");
  if (config_.beta.blocks_per_year <= 0) throw ValidationError("beta_blocks_per_year", "must be positive");
  if (!(config_.lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  require_fraction(config_.bonus_pool_fraction, "bonus_pool_fraction");
  require_fraction(config_.stake_cap_fraction, "stake_cap_fraction");
  require_fraction(config_.tft_accuracy, "tft_accuracy");
  require_fraction(config_.reweight_rate, "reweight_rate");
  if (config_.brains.size() > static_cast<std::size_t>(defaults::kMaxBrains))
    throw ValidationError("brains", "at most 1024 brains can exist, got " + std::to_string(config_.brains.size()));
  for (const auto& [name, acct] : config_.accounts)
    if (acct.based.base_units() < 0 || acct.pepecoin.base_units() < 0)
      throw ValidationError("accounts." + name, "balances must be non-negative");

  accounts_ = config_.accounts;
  apply_genesis();
  genesis_ = false;
  queue_ = config_.commands;
  std::stable_sort(queue_.begin(), queue_.end(),
                   [](const Command& a, const Command& b) { return a.at_block < b.at_block; });
  if (!queue_.empty() && queue_.front().at_block < 0) throw ValidationError("commands", "at_block must be >= 0");
}

void Network::apply_genesis() {
  for (std::size_t i = 0; i < config_.brains.size(); ++i) {
    const GenesisBrain& g = config_.brains[i];
    const std::string path = "brains[" + std::to_string(i) + "]";
    try {
      require_fraction(g.owner_fraction, path + ".owner_fraction");
      require_fraction(g.validator_share, path + ".validator_share");
      require_performance(g.performance);
      if (g.registration_fee.base_units() < 0 || g.memorize_fee.base_units() < 0)
        throw ValidationError(path, "fees must be non-negative");
      const BrainId id = acquire_brain(g.acquisition, g.owner, g.id);
      Brain& b = brains_.at(id);
      b.registration_fee = g.registration_fee;
      b.memorize_fee = g.memorize_fee;
      b.owner_fraction = g.owner_fraction;
      b.validator_share = g.validator_share;
      b.performance = g.performance;
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError(path, e.what());
    }
  }
  for (std::size_t i = 0; i < config_.peers.size(); ++i) {
    const GenesisPeer& g = config_.peers[i];
    const std::string path = "peers[" + std::to_string(i) + "]";
    try {
      add_peer(g.peer);
      for (BrainId b : g.brains) {
        memorize(b, g.peer.id);
        register_peer(b, g.peer.id, g.peer.role);
      }
    } catch (const Error& e) {
      throw ValidationError(path, e.what());
    }
  }
  for (std::size_t i = 0; i < config_.weights.size(); ++i) {
    try {
      set_weight(config_.weights[i]);
    } catch (const Error& e) {
      throw ValidationError("weights[" + std::to_string(i) + "]", e.what());
    }
  }
  for (std::size_t i = 0; i < config_.stakes.size(); ++i) {
    const GenesisStake& g = config_.stakes[i];
    try {
      stake(g.account, g.brain, g.validator, g.amount);
    } catch (const Error& e) {
      throw ValidationError("stakes[" + std::to_string(i) + "]", e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Lookups

Brain& Network::brain_ref(BrainId brain) {
  auto it = brains_.find(brain);
  if (it == brains_.end()) throw Error(ErrorKind::NotFound, "brain " + std::to_string(brain) + " does not exist");
  return it->second;
}

const Brain& Network::brain_ref(BrainId brain) const {
  auto it = brains_.find(brain);
  if (it == brains_.end()) throw Error(ErrorKind::NotFound, "brain " + std::to_string(brain) + " does not exist");
  return it->second;
}

Peer& Network::peer_ref(PeerId peer) {
  auto it = peers_.find(peer);
  if (it == peers_.end()) throw Error(ErrorKind::NotFound, "peer " + std::to_string(peer) + " does not exist");
  return it->second;
}

Account& Network::account_ref(const AccountId& id) {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw Error(ErrorKind::NotFound, "account '" + id + "' does not exist");
  return it->second;
}

const Account& Network::account(const AccountId& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw Error(ErrorKind::NotFound, "account '" + id + "' does not exist");
  return it->second;
}

TokenAmount Network::brain_stake(BrainId brain) const {
  TokenAmount total;
  for (const auto& [key, amount] : positions_)
    if (key.brain == brain) total += amount;
  return total;
}

TokenAmount Network::validator_stake(BrainId brain, PeerId validator) const {
  TokenAmount total;
  for (const auto& [key, amount] : positions_)
    if (key.brain == brain && key.validator == validator) total += amount;
  return total;
}

TokenAmount Network::network_stake() const {
  TokenAmount total;
  for (const auto& [key, amount] : positions_) total += amount;
  return total;
}

double Network::generated_weight(BrainId brain, PeerId from, PeerId to) const {
  std::uint64_t h = mix(config_.seed);
  h = mix(h ^ static_cast<std::uint64_t>(brain));
  h = mix(h ^ static_cast<std::uint64_t>(from));
  h = mix(h ^ static_cast<std::uint64_t>(to));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

consensus::WeightMatrix Network::weight_matrix(BrainId brain) const {
  const Brain& b = brain_ref(brain);
  const std::vector<PeerId> members = b.members();
  const auto n = static_cast<Eigen::Index>(members.size());
  consensus::WeightMatrix w = consensus::WeightMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto key = std::make_pair(members[i], members[j]);
      auto it = b.weight_overrides.find(key);
      w(i, j) = it != b.weight_overrides.end() ? it->second : generated_weight(brain, members[i], members[j]);
    }
  return w;
}

namespace {

std::vector<double> member_stakes(const Network& net, const Brain& b, const std::vector<PeerId>& members) {
  std::vector<double> s(members.size(), 0.0);
  for (std::size_t i = 0; i < members.size(); ++i)
    if (b.validators.count(members[i])) s[i] = net.validator_stake(b.id, members[i]).to_double();
  return s;
}

// Stake totals gathered in one pass over the positions.
struct StakeIndex {
  TokenAmount network;
  std::map<BrainId, TokenAmount> brain;
  std::map<std::pair<BrainId, PeerId>, TokenAmount> validator;
  std::map<std::pair<BrainId, PeerId>, std::vector<std::pair<AccountId, std::int64_t>>> delegators;

  explicit StakeIndex(const Network& net) {
    for (const auto& [key, amount] : net.positions()) {
      network += amount;
      brain[key.brain] += amount;
      if (!key.validator) continue;
      validator[{key.brain, *key.validator}] += amount;
      delegators[{key.brain, *key.validator}].emplace_back(key.account, amount.base_units());
    }
  }

  TokenAmount of(BrainId b) const {
    const auto it = brain.find(b);
    return it == brain.end() ? TokenAmount{} : it->second;
  }
  TokenAmount of(BrainId b, PeerId v) const {
    const auto it = validator.find({b, v});
    return it == validator.end() ? TokenAmount{} : it->second;
  }

  std::vector<double> member_stakes(const Brain& b, const std::vector<PeerId>& members) const {
    std::vector<double> s(members.size(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i)
      if (b.validators.count(members[i])) s[i] = of(b.id, members[i]).to_double();
    return s;
  }
};

}  // namespace

std::vector<PeerId> Network::consensus_members(BrainId brain) const {
  const Brain& b = brain_ref(brain);
  const std::vector<PeerId> members = b.members();
  const std::vector<double> s = member_stakes(*this, b, members);
  double total = 0.0;
  for (double v : s) total += v;
  if (!(total > 0.0)) return {};
  const std::vector<bool> in = consensus::consensus_set(consensus::trust_from_weights(weight_matrix(brain)), s);
  std::vector<PeerId> out;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (in[i]) out.push_back(members[i]);
  return out;
}

std::optional<BrainId> Network::next_free_id() const {
  const auto& reserved = defaults::reserved_brain_ids();
  auto is_reserved = [&](int id) { return std::find(reserved.begin(), reserved.end(), id) != reserved.end(); };
  for (int pass = 0; pass < 2; ++pass)
    for (BrainId id = 0; id < defaults::kMaxBrains; ++id)
      if (!brains_.count(id) && (pass == 1 || !is_reserved(id))) return id;
  return std::nullopt;
}

void Network::log(std::string kind, json payload) {
  events_.push_back(Event{height_, std::move(kind), std::move(payload)});
}

// ---------------------------------------------------------------------------
// Lifecycle operations

BrainId Network::acquire_brain(Acquisition method, const AccountId& account, std::optional<BrainId> id) {
  if (method == Acquisition::Admin && !genesis_)
    throw Error(ErrorKind::NotPermitted, "administrative brains exist only at genesis");
  if (active_brain_count() >= defaults::kMaxBrains)
    throw Error(ErrorKind::Capacity, "all 1024 brains are issued and active");
  Account& acct = account_ref(account);

  TokenAmount cost;
  if (method == Acquisition::Burn) cost = econ::burn_cost(burn_issued_);
  if (method == Acquisition::Stake) cost = TokenAmount::from_tokens(defaults::kStakeAcquisitionPepecoin);
  if (acct.pepecoin < cost)
    throw Error(ErrorKind::InsufficientFunds, "account '" + account + "' holds " + acct.pepecoin.to_string() +
                                                  " Pepecoin, needs " + cost.to_string());

  BrainId chosen = 0;
  if (id) {
    if (*id < 0 || *id >= defaults::kMaxBrains)
      throw Error(ErrorKind::Domain, "brain id must lie in [0, 1023]");
    if (brains_.count(*id)) throw Error(ErrorKind::Duplicate, "brain " + std::to_string(*id) + " already exists");
    chosen = *id;
  } else {
    const auto free = next_free_id();
    if (!free) throw Error(ErrorKind::Capacity, "no free brain id");
    chosen = *free;
  }

  acct.pepecoin -= cost;
  Brain b;
  b.id = chosen;
  b.acquisition = method;
  b.owner = account;
  b.acquired_at = height_;
  if (method == Acquisition::Burn) {
    burned_pepecoin_ += cost;
    ++burn_issued_;
  } else if (method == Acquisition::Stake) {
    b.locked_pepecoin = cost;
    b.lock_until = height_ + defaults::kStakeLockBlocks;
  }
  brains_.emplace(chosen, std::move(b));
  year_rewards_[chosen];
  log("acquire", {{"brain", chosen}, {"method", to_string(method)}, {"account", account}, {"pepecoin", cost.to_string()}});
  touch();
  return chosen;
}

void Network::deactivate_brain(BrainId brain) {
  Brain& b = brain_ref(brain);
  if (b.acquisition != Acquisition::Stake)
    throw Error(ErrorKind::NotPermitted, "only stake-acquired brains can be deactivated");
  if (height_ < b.lock_until)
    throw Error(ErrorKind::NotPermitted, "brain " + std::to_string(brain) + " is locked until block " +
                                             std::to_string(b.lock_until));
  Account& owner = account_ref(b.owner);
  for (const auto& [key, amount] : positions_)
    if (key.brain == brain) account_ref(key.account);  // all refund targets exist before mutating

  owner.pepecoin += b.locked_pepecoin;
  TokenAmount refunded;
  for (auto it = positions_.begin(); it != positions_.end();) {
    if (it->first.brain == brain) {
      accounts_.at(it->first.account).based += it->second;
      refunded += it->second;
      it = positions_.erase(it);
    } else {
      ++it;
    }
  }
  log("deactivate", {{"brain", brain}, {"pepecoin_returned", b.locked_pepecoin.to_string()},
                     {"stake_refunded", refunded.to_string()}});
  brains_.erase(brain);
  touch();
}

void Network::add_peer(Peer peer) {
  if (peers_.count(peer.id)) throw Error(ErrorKind::Duplicate, "peer " + std::to_string(peer.id) + " already exists");
  account_ref(peer.account);
  if (!(peer.quality >= 0.0)) throw Error(ErrorKind::Domain, "peer quality must be >= 0");
  for (const auto& e : peer.history)
    if (e.size() != peer.history.front().size())
      throw Error(ErrorKind::Shape, "peer history embeddings differ in dimension");
  log("add_peer", {{"peer", peer.id}, {"role", to_string(peer.role)}, {"account", peer.account}});
  peers_.emplace(peer.id, std::move(peer));
}

void Network::memorize(BrainId brain, PeerId peer) {
  Brain& b = brain_ref(brain);
  Peer& p = peer_ref(peer);
  if (b.memorized.count(peer))
    throw Error(ErrorKind::Duplicate, "peer " + std::to_string(peer) + " is already memorized by brain " +
                                          std::to_string(brain));
  Account& payer = account_ref(p.account);
  Account& owner = account_ref(b.owner);
  if (payer.based < b.memorize_fee)
    throw Error(ErrorKind::InsufficientFunds, "memorize fee " + b.memorize_fee.to_string() + " exceeds balance " +
                                                  payer.based.to_string());
  payer.based -= b.memorize_fee;
  owner.based += b.memorize_fee;
  b.memorized.insert(peer);
  log("memorize", {{"brain", brain}, {"peer", peer}, {"fee", b.memorize_fee.to_string()}});
}

void Network::register_peer(BrainId brain, PeerId peer, Role role) {
  Brain& b = brain_ref(brain);
  Peer& p = peer_ref(peer);
  if (p.role != role)
    throw Error(ErrorKind::Domain, "peer " + std::to_string(peer) + " is a " + to_string(p.role) + ", not a " +
                                       to_string(role));
  if (!b.memorized.count(peer))
    throw Error(ErrorKind::NotPermitted, "peer " + std::to_string(peer) + " must be memorized before registering");
  auto& slots = role == Role::Validator ? b.validators : b.miners;
  if (slots.count(peer)) throw Error(ErrorKind::Duplicate, "peer " + std::to_string(peer) + " is already registered");
  const std::size_t cap = role == Role::Validator ? defaults::kMaxValidatorsPerBrain : defaults::kMaxMinersPerBrain;
  if (slots.size() >= cap)
    throw Error(ErrorKind::Capacity, "brain " + std::to_string(brain) + " already has " + std::to_string(cap) + " " +
                                         to_string(role) + "s");
  Account& payer = account_ref(p.account);
  Account& owner = account_ref(b.owner);
  if (payer.based < b.registration_fee)
    throw Error(ErrorKind::InsufficientFunds, "registration fee " + b.registration_fee.to_string() +
                                                  " exceeds balance " + payer.based.to_string());
  payer.based -= b.registration_fee;
  owner.based += b.registration_fee;
  slots.emplace(peer, Registration{b.registration_fee, height_});
  b.credits.try_emplace(peer, 0.0);
  log("register", {{"brain", brain}, {"peer", peer}, {"role", to_string(role)}, {"fee", b.registration_fee.to_string()}});
  touch();
}

void Network::set_registration_fee(BrainId brain, TokenAmount fee) {
  if (fee.base_units() < 0) throw Error(ErrorKind::Domain, "fee must be non-negative");
  brain_ref(brain).registration_fee = fee;
  log("set_fee", {{"brain", brain}, {"fee", fee.to_string()}});
}

void Network::set_weight(const WeightEntry& entry) {
  Brain& b = brain_ref(entry.brain);
  if (!(entry.weight >= 0.0 && entry.weight <= 1.0)) throw Error(ErrorKind::Domain, "weight must lie in [0,1]");
  b.weight_overrides[{entry.from, entry.to}] = entry.weight;
  touch();
}

void Network::set_performance(BrainId brain, std::vector<double> performance) {
  Brain& b = brain_ref(brain);
  require_performance(performance);
  log("set_performance", {{"brain", brain}, {"performance", performance}});
  b.performance = std::move(performance);
  touch();
}

void Network::stake(const AccountId& account, BrainId brain, std::optional<PeerId> validator, TokenAmount amount) {
  if (amount.base_units() <= 0) throw Error(ErrorKind::Domain, "stake amount must be positive");
  Account& acct = account_ref(account);
  const Brain& b = brain_ref(brain);
  if (validator && !b.validators.count(*validator))
    throw Error(ErrorKind::NotFound, "peer " + std::to_string(*validator) + " is not a validator of brain " +
                                         std::to_string(brain));
  if (acct.based < amount)
    throw Error(ErrorKind::InsufficientFunds, "account '" + account + "' holds " + acct.based.to_string() +
                                                  ", cannot stake " + amount.to_string());
  acct.based -= amount;
  positions_[PositionKey{account, brain, validator}] += amount;
  log("stake", {{"account", account}, {"brain", brain}, {"validator", optional_id(validator)},
                {"amount", amount.to_string()}});
  touch();
}

void Network::unstake(const AccountId& account, BrainId brain, std::optional<PeerId> validator, TokenAmount amount) {
  if (amount.base_units() <= 0) throw Error(ErrorKind::Domain, "unstake amount must be positive");
  Account& acct = account_ref(account);
  auto it = positions_.find(PositionKey{account, brain, validator});
  const TokenAmount held = it == positions_.end() ? TokenAmount{} : it->second;
  if (held < amount)
    throw Error(ErrorKind::InsufficientFunds, "position holds " + held.to_string() + ", cannot unstake " +
                                                  amount.to_string());
  it->second -= amount;
  if (it->second.is_zero()) positions_.erase(it);
  acct.based += amount;
  log("unstake", {{"account", account}, {"brain", brain}, {"validator", optional_id(validator)},
                  {"amount", amount.to_string()}});
  touch();
}

std::set<BrainId> Network::gigabrain_set() const {
  std::set<BrainId> out;
  const TokenAmount total = network_stake();
  if (total.is_zero()) return out;
  const std::int64_t threshold_ppt = to_scaled_fraction(defaults::kGigaBrainStakeFraction);
  for (const auto& [id, b] : brains_) {
    const __int128 lhs = static_cast<__int128>(brain_stake(id).base_units()) * kFractionScale;
    const __int128 rhs = static_cast<__int128>(total.base_units()) * threshold_ppt;
    if (lhs >= rhs) out.insert(id);
  }
  return out;
}

VoteResult Network::vote(const std::string& proposal, const std::map<BrainId, Ballot>& ballots) {
  const std::set<BrainId> giga = gigabrain_set();
  VoteResult r;
  r.gigabrains = static_cast<int>(giga.size());
  for (const auto& [brain, ballot] : ballots) {
    if (!giga.count(brain)) {
      r.rejected_ballots.push_back(brain);
      log("ballot_rejected", {{"proposal", proposal}, {"brain", brain}, {"reason", "not a GigaBrain"}});
      continue;
    }
    if (ballot == Ballot::Up) ++r.up;
    if (ballot == Ballot::Down) ++r.down;
    if (ballot == Ballot::Abstain) ++r.abstain;
  }
  r.passed = !(2 * r.down > r.gigabrains);
  log("vote", {{"proposal", proposal}, {"outcome", r.passed ? "PASS" : "FAIL"}, {"gigabrains", r.gigabrains},
               {"up", r.up}, {"down", r.down}, {"abstain", r.abstain}});
  return r;
}

routing::WorkAssignment Network::route(BrainId brain, const std::vector<Embedding>& items) {
  const Brain& b = brain_ref(brain);
  if (b.miners.empty()) throw Error(ErrorKind::NotFound, "brain " + std::to_string(brain) + " has no miners");
  std::vector<routing::PeerHistory> histories;
  for (const auto& [id, reg] : b.miners) histories.push_back({id, peers_.at(id).history});
  const routing::WorkAssignment assignment = routing::distribute_work(items, histories);
  json payload = json::object();
  for (const auto& [peer, indices] : assignment) {
    payload[std::to_string(peer)] = indices;
    auto& history = peers_.at(peer).history;
    for (std::size_t i : indices) history.push_back(items[i]);
  }
  log("route", {{"brain", brain}, {"items", items.size()}, {"assignment", payload}});
  return assignment;
}

bool Network::apply(const Command& command) {
  try {
    std::visit(
        Overloaded{
            [&](const AcquireCmd& c) {
              if (c.method == Acquisition::Admin)
                throw Error(ErrorKind::NotPermitted, "administrative brains exist only at genesis");
              acquire_brain(c.method, c.account);
            },
            [&](const DeactivateCmd& c) { deactivate_brain(c.brain); },
            [&](const AddPeerCmd& c) { add_peer(c.peer); },
            [&](const MemorizeCmd& c) { memorize(c.brain, c.peer); },
            [&](const RegisterCmd& c) { register_peer(c.brain, c.peer, c.role); },
            [&](const SetFeeCmd& c) { set_registration_fee(c.brain, c.fee); },
            [&](const SetWeightCmd& c) { set_weight(c.entry); },
            [&](const SetPerformanceCmd& c) { set_performance(c.brain, c.performance); },
            [&](const StakeCmd& c) { stake(c.account, c.brain, c.validator, c.amount); },
            [&](const UnstakeCmd& c) { unstake(c.account, c.brain, c.validator, c.amount); },
            [&](const VoteCmd& c) { vote(c.proposal, c.ballots); },
            [&](const RouteCmd& c) { route(c.brain, c.items); },
        },
        command.op);
    return true;
  } catch (const Error& e) {
    static constexpr const char* kOpNames[] = {"acquire", "deactivate", "add_peer", "memorize",
                                               "register", "set_fee",   "set_weight", "set_performance",
                                               "stake",   "unstake",    "vote",     "route"};
    log("rejected", {{"op", kOpNames[command.op.index()]}, {"kind", basedlab::to_string(e.kind())},
                     {"reason", e.what()}});
    return false;
  }
}

// ---------------------------------------------------------------------------
// Block pipeline

const Network::Payout& Network::payout_for(TokenAmount minted, std::int64_t year, double beta) {
  if (!payout_ || payout_->version != version_ || payout_->minted != minted || payout_->year != year ||
      payout_->beta != beta || height_ >= payout_->valid_until) {
    auto plan = std::make_shared<Payout>();
    build_payout(*plan, minted, year, beta);
    plan->version = version_;
    plan->minted = minted;
    plan->year = year;
    plan->beta = beta;
    payout_ = std::move(plan);
  }
  return *payout_;
}

void Network::build_payout(Payout& plan, TokenAmount minted, std::int64_t year, double beta) {
  plan.valid_until = std::numeric_limits<std::int64_t>::max();
  std::map<AccountId, TokenAmount> transfers;
  TokenAmount withheld;

  const StakeIndex stakes(*this);
  std::vector<econ::BrainStakeProfile> profiles;
  std::vector<Brain*> order;
  for (auto& [id, b] : brains_) {
    const bool earning = b.acquisition != Acquisition::Stake || height_ >= b.lock_until;
    if (!earning) plan.valid_until = std::min(plan.valid_until, b.lock_until);
    profiles.push_back({id, stakes.of(id), earning ? b.performance_in_year(year) : 0.0, b.owner_fraction});
    order.push_back(&b);
  }

  std::vector<TokenAmount> allocation;
  try {
    if (profiles.empty()) throw Error(ErrorKind::Degenerate, "no brains");
    econ::DistributionOptions opts;
    opts.bonus_pool_fraction = config_.bonus_pool_fraction;
    opts.stake_cap_fraction = config_.stake_cap_fraction;
    opts.network_stake = stakes.network;
    allocation = econ::distribute_block_reward(profiles, minted, opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    withheld += minted;
  }

  const double t_years = config_.beta.years_at(height_);
  for (std::size_t k = 0; k < allocation.size(); ++k) {
    if (allocation[k].is_zero()) continue;
    Brain& b = *order[k];
    plan.brain_rewards.emplace_back(&year_rewards_[b.id], allocation[k]);
    const econ::RewardSplit split = econ::split_reward(allocation[k], b.owner_fraction);
    transfers[b.owner] += split.owner;

    const TokenAmount validator_pool = econ::split_reward(split.nodes, 1.0 - b.validator_share).nodes;
    const TokenAmount miner_pool = split.nodes - validator_pool;
    const std::vector<PeerId> members = b.members();
    if (members.empty()) {
      withheld += split.nodes;
      continue;
    }
    const consensus::WeightMatrix w = weight_matrix(b.id);
    const std::vector<double> s = stakes.member_stakes(b, members);
    double stake_total = 0.0;
    for (double v : s) stake_total += v;

    // Raw incentive I_i for the members flagged in `base`.
    auto raw_incentive = [&](const std::vector<double>& base) {
      if (stake_total > 0.0)
        return consensus::incentive(w, s, config_.tft_accuracy, t_years, config_.beta.mode, base, config_.lambda).raw;
      double base_total = 0.0;
      for (double v : base) base_total += v;
      const double c = consensus::sigmoid(0.0, config_.lambda);
      std::vector<double> raw(base.size());
      for (std::size_t i = 0; i < base.size(); ++i)
        raw[i] = (base_total > 0.0 ? base[i] / base_total * c : 0.0) + beta * config_.tft_accuracy;
      return raw;
    };

    // Validators: only the active (>= P70 stake) set is paid, by stake-weighted incentive.
    std::vector<std::size_t> validator_idx;
    std::vector<TokenAmount> validator_stakes;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (b.validators.count(members[i])) {
        validator_idx.push_back(i);
        validator_stakes.push_back(stakes.of(b.id, members[i]));
      }
    std::vector<double> base(members.size(), 0.0);
    std::vector<std::size_t> paid_validators;
    for (std::size_t a : econ::active_validators(validator_stakes)) {
      const std::size_t i = validator_idx[a];
      paid_validators.push_back(i);
      base[i] = s[i];
    }
    std::vector<double> weights;
    if (!paid_validators.empty()) {
      const std::vector<double> raw = raw_incentive(base);
      for (std::size_t i : paid_validators) weights.push_back(raw[i]);
    }
    double weight_sum = 0.0;
    for (double v : weights) weight_sum += v;
    if (validator_pool.is_zero() || weight_sum <= 0.0) {
      withheld += validator_pool;
    } else {
      const std::vector<TokenAmount> shares = apportion_real(validator_pool, weights);
      for (std::size_t a = 0; a < paid_validators.size(); ++a) {
        const PeerId vid = members[paid_validators[a]];
        const auto found = stakes.delegators.find({b.id, vid});
        if (found == stakes.delegators.end()) {
          transfers[peers_.at(vid).account] += shares[a];
          continue;
        }
        std::vector<std::int64_t> amounts;
        for (const auto& [acct, units] : found->second) amounts.push_back(units);
        const std::vector<TokenAmount> cut = apportion(shares[a], amounts);
        for (std::size_t d = 0; d < amounts.size(); ++d) transfers[found->second[d].first] += cut[d];
      }
    }

    // Miners: equal base share, scaled by consensus.
    std::vector<std::size_t> miner_idx;
    std::vector<double> miner_base(members.size(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i)
      if (b.miners.count(members[i])) {
        miner_idx.push_back(i);
        miner_base[i] = 1.0;
      }
    weights.clear();
    if (!miner_idx.empty()) {
      const std::vector<double> raw = raw_incentive(miner_base);
      for (std::size_t i : miner_idx) weights.push_back(raw[i]);
    }
    weight_sum = 0.0;
    for (double v : weights) weight_sum += v;
    if (miner_pool.is_zero() || weight_sum <= 0.0) {
      withheld += miner_pool;
    } else {
      const std::vector<TokenAmount> shares = apportion_real(miner_pool, weights);
      for (std::size_t a = 0; a < miner_idx.size(); ++a) transfers[peers_.at(members[miner_idx[a]]).account] += shares[a];
    }
  }

  // Credits: delta = W . s_hat per brain.
  for (auto& [id, b] : brains_) {
    const std::vector<PeerId> members = b.members();
    if (members.empty()) continue;
    std::vector<double> s = stakes.member_stakes(b, members);
    double total = 0.0;
    for (double v : s) total += v;
    if (!(total > 0.0)) continue;
    for (double& v : s) v /= total;
    const std::vector<double> delta = consensus::credits_update(weight_matrix(id), s);
    for (std::size_t i = 0; i < members.size(); ++i)
      if (delta[i] != 0.0) plan.credits.emplace_back(&b.credits[members[i]], delta[i]);
  }

  for (const auto& [acct, amount] : transfers) {
    if (amount.is_zero()) continue;
    plan.transfers.emplace_back(&account_ref(acct), amount);
    plan.distributed += amount;
  }
  plan.withheld = withheld;
}

BlockReport Network::step_block() {
  BlockReport report;
  report.height = height_;
  report.minted = econ::emission_at_block(config_.emission, height_);
  const std::int64_t year = econ::year_of_block(config_.emission, height_);
  const double beta = consensus::beta(config_.beta.years_at(height_), config_.beta.mode);

  const Payout& plan = payout_for(report.minted, year, beta);
  for (const auto& [acct, amount] : plan.transfers) acct->based += amount;
  for (const auto& [slot, amount] : plan.brain_rewards) *slot += amount;
  for (const auto& [credit, delta] : plan.credits) *credit += delta;
  report.distributed = plan.distributed;
  report.withheld = plan.withheld;
  if (report.distributed + report.withheld != report.minted)
    throw std::logic_error("block " + std::to_string(height_) + " does not conserve emission");

  minted_ += report.minted;
  distributed_ += report.distributed;
  withheld_ += report.withheld;
  year_minted_ += report.minted;
  year_distributed_ += report.distributed;
  year_withheld_ += report.withheld;

  if (config_.log_blocks)
    log("block", {{"minted", report.minted.to_string()}, {"distributed", report.distributed.to_string()},
                  {"withheld", report.withheld.to_string()}});

  while (next_command_ < queue_.size() && queue_[next_command_].at_block <= height_) apply(queue_[next_command_++]);

  ++height_;
  if (height_ % config_.emission.blocks_per_year == 0) close_year(height_ - year_start_);
  return report;
}

void Network::run(std::int64_t blocks, const std::function<void(const BlockReport&)>& observer) {
  for (std::int64_t b = 0; b < blocks; ++b) {
    const BlockReport r = step_block();
    if (observer) observer(r);
  }
}

void Network::finish() {
  if (height_ > year_start_) close_year(height_ - year_start_);
}

void Network::close_year(std::int64_t blocks_in_period) {
  YearSummary y;
  y.year = year_start_ / config_.emission.blocks_per_year + 1;
  y.blocks = blocks_in_period;
  y.minted = year_minted_;
  y.distributed = year_distributed_;
  y.withheld = year_withheld_;
  const std::set<BrainId> giga = gigabrain_set();
  json brains = json::array();
  for (const auto& [id, b] : brains_) {
    BrainYear by;
    by.brain = id;
    by.reward = year_rewards_[id];
    by.stake = brain_stake(id);
    if (!by.stake.is_zero() && blocks_in_period > 0)
      by.apy_realized = by.reward.to_double() / by.stake.to_double() *
                        static_cast<double>(config_.emission.blocks_per_year) / static_cast<double>(blocks_in_period);
    by.gigabrain = giga.count(id) > 0;
    by.consensus = consensus_members(id);
    for (const auto& [peer, c] : b.credits) by.credits_total += c;
    brains.push_back({{"brain", id}, {"reward", by.reward.to_string()}, {"stake", by.stake.to_string()},
                      {"apy_realized", by.apy_realized}, {"gigabrain", by.gigabrain}, {"consensus", by.consensus},
                      {"credits_total", by.credits_total}});
    y.brains.push_back(std::move(by));
  }
  log("year_summary", {{"year", y.year}, {"blocks", y.blocks}, {"minted", y.minted.to_string()},
                       {"distributed", y.distributed.to_string()}, {"withheld", y.withheld.to_string()},
                       {"brains", brains}});
  years_.push_back(std::move(y));

  year_start_ = height_;
  year_minted_ = year_distributed_ = year_withheld_ = TokenAmount{};
  for (auto& [id, amount] : year_rewards_) amount = TokenAmount{};

  if (config_.reweight_rate > 0.0) {
    for (auto& [id, b] : brains_) {
      const std::vector<PeerId> members = b.members();
      if (members.size() < 2) continue;
      consensus::CreditsLedger ledger;
      std::vector<double> contribution;
      double quality_total = 0.0;
      for (PeerId m : members) {
        ledger.credits.push_back(b.credits[m]);
        contribution.push_back(peers_.at(m).quality);
        quality_total += peers_.at(m).quality;
      }
      if (quality_total > 0.0)
        for (double& c : contribution) c /= quality_total;
      const consensus::WeightMatrix w =
          consensus::adaptive_reweight(weight_matrix(id), ledger, contribution, config_.reweight_rate);
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < members.size(); ++j)
          if (i != j)
            b.weight_overrides[{members[i], members[j]}] =
                w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    log("reweight", {{"rate", config_.reweight_rate}});
    touch();
  }
}

// ---------------------------------------------------------------------------
// Serialization

json Network::canonical_state() const {
  json accounts = json::object();
  for (const auto& [name, a] : accounts_)
    accounts[name] = {{"based", a.based.to_string()}, {"pepecoin", a.pepecoin.to_string()}};

  json brains = json::array();
  for (const auto& [id, b] : brains_) {
    auto regs = [](const std::map<PeerId, Registration>& m) {
      json out = json::array();
      for (const auto& [peer, r] : m) out.push_back({{"peer", peer}, {"fee_paid", r.fee_paid.to_string()}, {"block", r.block}});
      return out;
    };
    json credits = json::array();
    for (const auto& [peer, c] : b.credits) credits.push_back({peer, c});
    json weights = json::array();
    for (const auto& [key, w] : b.weight_overrides) weights.push_back({key.first, key.second, w});
    brains.push_back({{"id", id},
                      {"acquisition", to_string(b.acquisition)},
                      {"owner", b.owner},
                      {"acquired_at", b.acquired_at},
                      {"lock_until", b.lock_until},
                      {"locked_pepecoin", b.locked_pepecoin.to_string()},
                      {"registration_fee", b.registration_fee.to_string()},
                      {"memorize_fee", b.memorize_fee.to_string()},
                      {"owner_fraction", b.owner_fraction},
                      {"validator_share", b.validator_share},
                      {"performance", b.performance},
                      {"memorized", b.memorized},
                      {"validators", regs(b.validators)},
                      {"miners", regs(b.miners)},
                      {"credits", credits},
                      {"weights", weights}});
  }

  json peers = json::array();
  for (const auto& [id, p] : peers_)
    peers.push_back({{"id", id}, {"role", to_string(p.role)}, {"account", p.account}, {"quality", p.quality},
                     {"history", p.history}});

  json positions = json::array();
  for (const auto& [key, amount] : positions_)
    positions.push_back({{"account", key.account}, {"brain", key.brain}, {"validator", optional_id(key.validator)},
                         {"amount", amount.to_string()}});

  return json{{"height", height_},
              {"minted", minted_.to_string()},
              {"distributed", distributed_.to_string()},
              {"withheld", withheld_.to_string()},
              {"burned_pepecoin", burned_pepecoin_.to_string()},
              {"burn_issued", burn_issued_},
              {"accounts", accounts},
              {"brains", brains},
              {"peers", peers},
              {"positions", positions}};
}

std::string Network::digest() const {
  const std::string text = canonical_state().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace basedlab::sim
