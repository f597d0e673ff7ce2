#include "basedlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string_view>

#include "basedlab/errors.hpp"

namespace basedlab::scenario {

using nlohmann::json;

namespace {

std::string at(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string at(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

const json& object(const json& v, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!v.is_object()) throw ValidationError(path.empty() ? "$" : path, "expected an object");
  for (const auto& [key, value] : v.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ValidationError(at(path, key), "unknown field");
  }
  return v;
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array");
  return v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
  return d;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  throw ValidationError(path, "expected an integer");
}

double fraction(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (d < 0.0 || d > 1.0) throw ValidationError(path, "must lie in [0,1]");
  return d;
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError(path, "expected true or false");
  return v.get<bool>();
}

TokenAmount amount(const json& v, const std::string& path) {
  try {
    if (v.is_string()) return TokenAmount::parse(v.get<std::string>());
    if (v.is_number_integer() || v.is_number_unsigned()) return TokenAmount::parse(v.dump());
    if (v.is_number_float()) return TokenAmount::parse(v.dump());
  } catch (const Error& e) {
    throw ValidationError(path, e.what());
  }
  throw ValidationError(path, "expected a token amount (string or number)");
}

std::vector<double> numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

std::vector<routing::Embedding> embeddings(const json& v, const std::string& path) {
  std::vector<routing::Embedding> out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) {
    out.push_back(numbers(v[i], at(path, i)));
    if (out.back().size() != out.front().size()) throw ValidationError(at(path, i), "embedding dimension differs");
  }
  return out;
}

std::vector<double> performance(const json& v, const std::string& path) {
  if (v.is_number()) return {fraction(v, path)};
  std::vector<double> out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) out.push_back(fraction(v[i], at(path, i)));
  if (out.empty()) throw ValidationError(path, "needs at least one value");
  return out;
}

template <class F>
void optional(const json& obj, std::string_view key, const std::string& path, F&& f) {
  auto it = obj.find(std::string(key));
  if (it != obj.end()) f(*it, at(path, key));
}

template <class F>
void required(const json& obj, std::string_view key, const std::string& path, F&& f) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ValidationError(at(path, key), "missing required field");
  f(*it, at(path, key));
}

sim::Acquisition acquisition(const json& v, const std::string& path) {
  const std::string s = text(v, path);
  if (s == "burn") return sim::Acquisition::Burn;
  if (s == "stake") return sim::Acquisition::Stake;
  if (s == "admin") return sim::Acquisition::Admin;
  throw ValidationError(path, "expected \"burn\", \"stake\" or \"admin\"");
}

sim::Role role(const json& v, const std::string& path) {
  const std::string s = text(v, path);
  if (s == "miner") return sim::Role::Miner;
  if (s == "validator") return sim::Role::Validator;
  throw ValidationError(path, "expected \"miner\" or \"validator\"");
}

sim::Ballot ballot(const json& v, const std::string& path) {
  const std::string s = text(v, path);
  if (s == "up") return sim::Ballot::Up;
  if (s == "down") return sim::Ballot::Down;
  if (s == "abstain") return sim::Ballot::Abstain;
  throw ValidationError(path, "expected \"up\", \"down\" or \"abstain\"");
}

sim::Peer peer(const json& v, const std::string& path, bool with_brains) {
  if (with_brains)
    object(v, path, {"id", "role", "account", "quality", "history", "brains"});
  else
    object(v, path, {"id", "role", "account", "quality", "history"});
  sim::Peer p;
  required(v, "id", path, [&](const json& x, const std::string& q) { p.id = integer(x, q); });
  required(v, "role", path, [&](const json& x, const std::string& q) { p.role = role(x, q); });
  required(v, "account", path, [&](const json& x, const std::string& q) { p.account = text(x, q); });
  optional(v, "quality", path, [&](const json& x, const std::string& q) {
    p.quality = number(x, q);
    if (p.quality < 0.0) throw ValidationError(q, "must be >= 0");
  });
  optional(v, "history", path, [&](const json& x, const std::string& q) { p.history = embeddings(x, q); });
  return p;
}

std::optional<sim::PeerId> validator(const json& obj, const std::string& path) {
  std::optional<sim::PeerId> out;
  optional(obj, "validator", path, [&](const json& x, const std::string& q) {
    if (!x.is_null()) out = integer(x, q);
  });
  return out;
}

sim::WeightEntry weight(const json& v, const std::string& path, bool as_command) {
  if (as_command)
    object(v, path, {"at_block", "op", "brain", "from", "to", "weight"});
  else
    object(v, path, {"brain", "from", "to", "weight"});
  sim::WeightEntry w;
  required(v, "brain", path, [&](const json& x, const std::string& q) { w.brain = static_cast<int>(integer(x, q)); });
  required(v, "from", path, [&](const json& x, const std::string& q) { w.from = integer(x, q); });
  required(v, "to", path, [&](const json& x, const std::string& q) { w.to = integer(x, q); });
  required(v, "weight", path, [&](const json& x, const std::string& q) { w.weight = fraction(x, q); });
  return w;
}

sim::Command command(const json& v, const std::string& path) {
  if (!v.is_object()) throw ValidationError(path, "expected an object");
  sim::Command c;
  required(v, "at_block", path, [&](const json& x, const std::string& q) {
    c.at_block = integer(x, q);
    if (c.at_block < 0) throw ValidationError(q, "must be >= 0");
  });
  std::string op;
  required(v, "op", path, [&](const json& x, const std::string& q) { op = text(x, q); });
  auto brain_of = [&] {
    int b = 0;
    required(v, "brain", path, [&](const json& x, const std::string& q) { b = static_cast<int>(integer(x, q)); });
    return b;
  };
  auto peer_of = [&] {
    sim::PeerId p = 0;
    required(v, "peer", path, [&](const json& x, const std::string& q) { p = integer(x, q); });
    return p;
  };
  auto account_of = [&] {
    std::string a;
    required(v, "account", path, [&](const json& x, const std::string& q) { a = text(x, q); });
    return a;
  };
  auto amount_of = [&](std::string_view key) {
    TokenAmount t;
    required(v, key, path, [&](const json& x, const std::string& q) { t = amount(x, q); });
    return t;
  };

  if (op == "acquire") {
    object(v, path, {"at_block", "op", "method", "account"});
    sim::AcquireCmd cmd;
    required(v, "method", path, [&](const json& x, const std::string& q) { cmd.method = acquisition(x, q); });
    cmd.account = account_of();
    c.op = cmd;
  } else if (op == "deactivate") {
    object(v, path, {"at_block", "op", "brain"});
    c.op = sim::DeactivateCmd{brain_of()};
  } else if (op == "add_peer") {
    object(v, path, {"at_block", "op", "peer"});
    sim::AddPeerCmd cmd;
    required(v, "peer", path, [&](const json& x, const std::string& q) { cmd.peer = peer(x, q, false); });
    c.op = cmd;
  } else if (op == "memorize") {
    object(v, path, {"at_block", "op", "brain", "peer"});
    c.op = sim::MemorizeCmd{brain_of(), peer_of()};
  } else if (op == "register") {
    object(v, path, {"at_block", "op", "brain", "peer", "role"});
    sim::RegisterCmd cmd{brain_of(), peer_of()};
    required(v, "role", path, [&](const json& x, const std::string& q) { cmd.role = role(x, q); });
    c.op = cmd;
  } else if (op == "set_fee") {
    object(v, path, {"at_block", "op", "brain", "fee"});
    c.op = sim::SetFeeCmd{brain_of(), amount_of("fee")};
  } else if (op == "set_weight") {
    c.op = sim::SetWeightCmd{weight(v, path, true)};
  } else if (op == "set_performance") {
    object(v, path, {"at_block", "op", "brain", "performance"});
    sim::SetPerformanceCmd cmd{brain_of(), {}};
    required(v, "performance", path, [&](const json& x, const std::string& q) { cmd.performance = performance(x, q); });
    c.op = cmd;
  } else if (op == "stake" || op == "unstake") {
    object(v, path, {"at_block", "op", "account", "brain", "validator", "amount"});
    const std::string account = account_of();
    const int brain = brain_of();
    const auto val = validator(v, path);
    const TokenAmount amt = amount_of("amount");
    if (op == "stake")
      c.op = sim::StakeCmd{account, brain, val, amt};
    else
      c.op = sim::UnstakeCmd{account, brain, val, amt};
  } else if (op == "vote") {
    object(v, path, {"at_block", "op", "proposal", "ballots"});
    sim::VoteCmd cmd;
    required(v, "proposal", path, [&](const json& x, const std::string& q) { cmd.proposal = text(x, q); });
    optional(v, "ballots", path, [&](const json& x, const std::string& q) {
      if (!x.is_object()) throw ValidationError(q, "expected an object of brain id -> ballot");
      for (const auto& [key, value] : x.items()) {
        int brain = 0;
        try {
          std::size_t used = 0;
          brain = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          throw ValidationError(at(q, key), "ballot keys must be brain ids");
        }
        cmd.ballots[brain] = ballot(value, at(q, key));
      }
    });
    c.op = cmd;
  } else if (op == "route") {
    object(v, path, {"at_block", "op", "brain", "items"});
    sim::RouteCmd cmd{brain_of(), {}};
    required(v, "items", path, [&](const json& x, const std::string& q) { cmd.items = embeddings(x, q); });
    c.op = cmd;
  } else {
    throw ValidationError(at(path, "op"), "unknown command '" + op + "'");
  }
  return c;
}

}  // namespace

std::int64_t Scenario::blocks() const {
  return std::llround(years * static_cast<double>(network.emission.blocks_per_year));
}

Scenario parse(const json& doc) {
  const std::string root;
  object(doc, root,
         {"seed", "years", "blocks_per_year", "beta_mode", "beta_blocks_per_year", "lambda", "bonus_pool_fraction",
          "stake_cap_fraction", "tft_accuracy", "reweight_rate", "log_blocks", "accounts", "brains", "peers",
          "stakes", "weights", "commands", "quant"});
  Scenario s;
  sim::NetworkConfig& n = s.network;

  optional(doc, "seed", root, [&](const json& x, const std::string& q) {
    if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<std::int64_t>() >= 0))
      throw ValidationError(q, "expected a non-negative integer");
    n.seed = x.get<std::uint64_t>();
  });
  optional(doc, "years", root, [&](const json& x, const std::string& q) {
    s.years = number(x, q);
    if (s.years < 0.0 || s.years > 64.0) throw ValidationError(q, "must lie in [0, 64]");
  });
  optional(doc, "blocks_per_year", root, [&](const json& x, const std::string& q) {
    n.emission.blocks_per_year = integer(x, q);
    if (n.emission.blocks_per_year <= 0) throw ValidationError(q, "must be positive");
  });
  optional(doc, "beta_mode", root, [&](const json& x, const std::string& q) {
    const std::string m = text(x, q);
    if (m == "text-linear")
      n.beta.mode = consensus::BetaMode::TextLinear;
    else if (m == "table-lookup")
      n.beta.mode = consensus::BetaMode::TableLookup;
    else
      throw ValidationError(q, "expected \"text-linear\" or \"table-lookup\"");
  });
  optional(doc, "beta_blocks_per_year", root, [&](const json& x, const std::string& q) {
    n.beta.blocks_per_year = integer(x, q);
    if (n.beta.blocks_per_year <= 0) throw ValidationError(q, "must be positive");
  });
  optional(doc, "lambda", root, [&](const json& x, const std::string& q) {
    n.lambda = number(x, q);
    if (!(n.lambda > 0.0)) throw ValidationError(q, "must be positive");
  });
  optional(doc, "bonus_pool_fraction", root,
           [&](const json& x, const std::string& q) { n.bonus_pool_fraction = fraction(x, q); });
  optional(doc, "stake_cap_fraction", root,
           [&](const json& x, const std::string& q) { n.stake_cap_fraction = fraction(x, q); });
  optional(doc, "tft_accuracy", root, [&](const json& x, const std::string& q) { n.tft_accuracy = fraction(x, q); });
  optional(doc, "reweight_rate", root, [&](const json& x, const std::string& q) { n.reweight_rate = fraction(x, q); });
  optional(doc, "log_blocks", root, [&](const json& x, const std::string& q) { n.log_blocks = boolean(x, q); });

  if (auto it = doc.find("accounts"); it != doc.end()) {
    if (!it->is_object()) throw ValidationError("accounts", "expected an object of account name -> balances");
    for (const auto& [name, value] : it->items()) {
      const std::string q = at("accounts", name);
      object(value, q, {"based", "pepecoin"});
      sim::Account a;
      optional(value, "based", q, [&](const json& x, const std::string& p) { a.based = amount(x, p); });
      optional(value, "pepecoin", q, [&](const json& x, const std::string& p) { a.pepecoin = amount(x, p); });
      n.accounts.emplace(name, a);
    }
  }

  optional(doc, "brains", root, [&](const json& x, const std::string& q) {
    array(x, q);
    if (x.size() > static_cast<std::size_t>(defaults::kMaxBrains))
      throw ValidationError(q, "at most 1024 brains can exist, got " + std::to_string(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::string p = at(q, i);
      object(x[i], p,
             {"id", "owner", "acquisition", "registration_fee", "memorize_fee", "owner_fraction", "validator_share",
              "performance", "stake"});
      sim::GenesisBrain b;
      optional(x[i], "id", p, [&](const json& v, const std::string& r) {
        const auto id = integer(v, r);
        if (id < 0 || id >= defaults::kMaxBrains) throw ValidationError(r, "must lie in [0, 1023]");
        b.id = static_cast<int>(id);
      });
      required(x[i], "owner", p, [&](const json& v, const std::string& r) { b.owner = text(v, r); });
      optional(x[i], "acquisition", p, [&](const json& v, const std::string& r) { b.acquisition = acquisition(v, r); });
      optional(x[i], "registration_fee", p,
               [&](const json& v, const std::string& r) { b.registration_fee = amount(v, r); });
      optional(x[i], "memorize_fee", p, [&](const json& v, const std::string& r) { b.memorize_fee = amount(v, r); });
      optional(x[i], "owner_fraction", p,
               [&](const json& v, const std::string& r) { b.owner_fraction = fraction(v, r); });
      optional(x[i], "validator_share", p,
               [&](const json& v, const std::string& r) { b.validator_share = fraction(v, r); });
      optional(x[i], "performance", p, [&](const json& v, const std::string& r) { b.performance = performance(v, r); });
      optional(x[i], "stake", p, [&](const json& v, const std::string& r) {
        if (!b.id) throw ValidationError(r, "a brain-level stake needs an explicit brain id");
        n.stakes.push_back({b.owner, *b.id, std::nullopt, amount(v, r)});
      });
      n.brains.push_back(std::move(b));
    }
  });

  optional(doc, "peers", root, [&](const json& x, const std::string& q) {
    for (std::size_t i = 0; i < array(x, q).size(); ++i) {
      const std::string p = at(q, i);
      sim::GenesisPeer g{peer(x[i], p, true), {}};
      optional(x[i], "brains", p, [&](const json& v, const std::string& r) {
        for (std::size_t k = 0; k < array(v, r).size(); ++k) g.brains.push_back(static_cast<int>(integer(v[k], at(r, k))));
      });
      n.peers.push_back(std::move(g));
    }
  });

  optional(doc, "stakes", root, [&](const json& x, const std::string& q) {
    for (std::size_t i = 0; i < array(x, q).size(); ++i) {
      const std::string p = at(q, i);
      object(x[i], p, {"account", "brain", "validator", "amount"});
      sim::GenesisStake g;
      required(x[i], "account", p, [&](const json& v, const std::string& r) { g.account = text(v, r); });
      required(x[i], "brain", p, [&](const json& v, const std::string& r) { g.brain = static_cast<int>(integer(v, r)); });
      g.validator = validator(x[i], p);
      required(x[i], "amount", p, [&](const json& v, const std::string& r) { g.amount = amount(v, r); });
      n.stakes.push_back(std::move(g));
    }
  });

  optional(doc, "weights", root, [&](const json& x, const std::string& q) {
    for (std::size_t i = 0; i < array(x, q).size(); ++i) n.weights.push_back(weight(x[i], at(q, i), false));
  });

  optional(doc, "commands", root, [&](const json& x, const std::string& q) {
    for (std::size_t i = 0; i < array(x, q).size(); ++i) n.commands.push_back(command(x[i], at(q, i)));
  });

  optional(doc, "quant", root, [&](const json& x, const std::string& q) {
    object(x, q, {"levels", "threshold", "alpha"});
    optional(x, "levels", q, [&](const json& v, const std::string& r) {
      const auto l = integer(v, r);
      if (l < 2 || l > (1 << 24)) throw ValidationError(r, "must lie in [2, 2^24]");
      s.quant.levels = static_cast<int>(l);
    });
    optional(x, "threshold", q, [&](const json& v, const std::string& r) { s.quant.threshold = number(v, r); });
    optional(x, "alpha", q, [&](const json& v, const std::string& r) {
      s.quant.alpha = number(v, r);
      if (!(s.quant.alpha > 0.0 && s.quant.alpha < 1.0)) throw ValidationError(r, "must lie in (0,1)");
    });
  });

  for (const auto& b : n.brains)
    if (!n.accounts.count(b.owner)) {
      const auto i = static_cast<std::size_t>(&b - n.brains.data());
      throw ValidationError(at(at("brains", i), "owner"), "unknown account '" + b.owner + "'");
    }
  return s;
}

Scenario load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse(doc);
}

}  // namespace basedlab::scenario
