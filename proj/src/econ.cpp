#include "basedlab/econ.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <limits>
#include <numeric>

#include "apportion_detail.hpp"
#include "basedlab/apportion.hpp"
#include "basedlab/errors.hpp"

namespace basedlab::econ {

namespace {

void require_fraction(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::Domain, std::string(what) + " must lie in [0,1]");
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

TokenAmount block_reward(const EmissionSchedule& schedule, std::int64_t year) {
  if (year < 1) throw Error(ErrorKind::Domain, "year must be >= 1");
  const std::int64_t halvings = (year - 1) / std::max<std::int64_t>(schedule.halving_interval_years, 1);
  if (halvings >= 63) return TokenAmount{};
  return TokenAmount::from_base_units(schedule.genesis_block_reward.base_units() >> halvings);
}

TokenAmount annual_emission(const EmissionSchedule& schedule, std::int64_t year) {
  return block_reward(schedule, year) * schedule.blocks_per_year;
}

std::int64_t year_of_block(const EmissionSchedule& schedule, std::int64_t height) {
  if (height < 0) throw Error(ErrorKind::Domain, "block height must be >= 0");
  return 1 + height / schedule.blocks_per_year;
}

TokenAmount emission_at_block(const EmissionSchedule& schedule, std::int64_t height) {
  return block_reward(schedule, year_of_block(schedule, height));
}

TokenAmount burn_cost(std::int64_t already_burn_issued) {
  if (already_burn_issued < 0) throw Error(ErrorKind::Domain, "burn count must be >= 0");
  if (already_burn_issued >= defaults::kMaxBrains)
    throw Error(ErrorKind::Capacity, "brain supply exhausted: 1024 brains already issued by burn");
  return TokenAmount::from_tokens(defaults::kBurnBaseCostPepecoin +
                                  defaults::kBurnCostStepPepecoin * already_burn_issued);
}

TokenAmount cumulative_burn(std::int64_t count) {
  if (count < 0) throw Error(ErrorKind::Domain, "burn count must be >= 0");
  if (count > defaults::kMaxBrains)
    throw Error(ErrorKind::Capacity, "at most 1024 brains can be issued");
  // sum_{k<count} (base + step*k) = base*count + step*count*(count-1)/2
  const std::int64_t tokens = defaults::kBurnBaseCostPepecoin * count +
                              defaults::kBurnCostStepPepecoin * count * (count - 1) / 2;
  return TokenAmount::from_tokens(tokens);
}

RewardSplit split_reward(TokenAmount total, double owner_fraction) {
  require_fraction(owner_fraction, "owner_fraction");
  if (total.base_units() < 0) throw Error(ErrorKind::Domain, "reward must be non-negative");
  const __int128 node_fraction = kFractionScale - to_scaled_fraction(owner_fraction);
  const auto nodes = static_cast<std::int64_t>(static_cast<__int128>(total.base_units()) * node_fraction /
                                               kFractionScale);
  const TokenAmount node_amount = TokenAmount::from_base_units(nodes);
  return {node_amount, total - node_amount};
}

TokenAmount stake_cap(TokenAmount network_stake, double cap_fraction) {
  require_fraction(cap_fraction, "stake_cap_fraction");
  return TokenAmount::from_base_units(static_cast<std::int64_t>(
      static_cast<__int128>(network_stake.base_units()) * to_scaled_fraction(cap_fraction) / kFractionScale));
}

std::vector<TokenAmount> distribute_block_reward(std::span<const BrainStakeProfile> profiles,
                                                 TokenAmount reward,
                                                 const DistributionOptions& options) {
  require_fraction(options.bonus_pool_fraction, "bonus_pool_fraction");
  if (reward.base_units() < 0) throw Error(ErrorKind::Domain, "reward must be non-negative");

  TokenAmount network{};
  for (const auto& p : profiles) {
    require_fraction(p.performance, "performance");
    if (p.total_stake.base_units() < 0) throw Error(ErrorKind::Domain, "stake must be non-negative");
    network += p.total_stake;
  }
  const TokenAmount cap = stake_cap(options.network_stake.value_or(network), options.stake_cap_fraction);

  std::vector<detail::Wide> weights(profiles.size());
  bool any_weight = false;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const TokenAmount capped = std::min(profiles[i].total_stake, cap);
    weights[i] = detail::Wide(capped.base_units()) * to_scaled_fraction(profiles[i].performance);
    any_weight = any_weight || weights[i] > 0;
  }
  if (!any_weight) throw Error(ErrorKind::Degenerate, "every brain has zero capped stake x performance");

  const TokenAmount bonus = TokenAmount::from_base_units(static_cast<std::int64_t>(
      static_cast<__int128>(reward.base_units()) * to_scaled_fraction(options.bonus_pool_fraction) /
      kFractionScale));
  std::vector<TokenAmount> out = detail::apportion_wide(reward - bonus, weights);
  if (bonus.is_zero()) return out;

  // Bonus: equal split among the top 30% (by performance) of weighted brains.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < profiles.size(); ++i)
    if (weights[i] > 0) candidates.push_back(i);
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (profiles[a].performance != profiles[b].performance)
      return profiles[a].performance > profiles[b].performance;
    return profiles[a].brain_id < profiles[b].brain_id;
  });
  const std::size_t slots = (3 * candidates.size() + 9) / 10;
  candidates.resize(slots);
  std::sort(candidates.begin(), candidates.end());
  const std::vector<std::int64_t> equal(slots, 1);
  const auto bonus_shares = apportion(bonus, equal);
  for (std::size_t k = 0; k < slots; ++k) out[candidates[k]] += bonus_shares[k];
  return out;
}

std::vector<std::size_t> active_validators(std::span<const TokenAmount> stakes) {
  if (stakes.empty()) return {};
  std::vector<TokenAmount> sorted(stakes.begin(), stakes.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = (7 * sorted.size() + 9) / 10;  // ceil(0.7 n), 1-based
  const TokenAmount threshold = sorted[std::max<std::size_t>(rank, 1) - 1];
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < stakes.size(); ++i)
    if (stakes[i] >= threshold) active.push_back(i);
  return active;
}

TokenAmount project_stake(TokenAmount amount, double apy, std::int64_t years) {
  if (!(apy >= 0.0)) throw Error(ErrorKind::Domain, "apy must be >= 0");
  if (years < 0) throw Error(ErrorKind::Domain, "years must be >= 0");
  if (amount.base_units() < 0) throw Error(ErrorKind::Domain, "amount must be non-negative");
  using boost::multiprecision::cpp_int;
  const cpp_int scale = kFractionScale;
  const cpp_int growth = scale + to_scaled_fraction(apy);
  cpp_int numerator = amount.base_units();
  cpp_int denominator = 1;
  for (std::int64_t y = 0; y < years; ++y) {
    numerator *= growth;
    denominator *= scale;
  }
  const cpp_int result = numerator / denominator;
  if (result > std::numeric_limits<std::int64_t>::max())
    throw Error(ErrorKind::Domain, "projected stake overflows");
  return TokenAmount::from_base_units(result.convert_to<std::int64_t>());
}

const std::vector<ModelPricing>& model_catalog() {
  static const std::vector<ModelPricing> catalog = [] {
    auto row = [](std::string provider, std::string name, const char* prompt, const char* completion,
                  std::int64_t context) {
      return ModelPricing{std::move(provider), std::move(name), TokenAmount::parse(prompt),
                          TokenAmount::parse(completion), context};
    };
    return std::vector<ModelPricing>{
        row("OpenAI", "GPT-4", "0.03", "0.06", 8191),
        row("OpenAI", "GPT-3.5 Turbo", "0.01", "0.02", 4095),
        row("Google", "PaLM 2 Chat", "0.00025", "0.0005", 36864),
        row("Anthropic", "Claude v2", "0.008", "0.024", 200000),
        row("Mistral", "Medium", "0.002778", "0.008333", 32000),
        row("Nous", "Hermes 2 Mistral 8x7B DPO", "0.00018", "0.00054", 8192),
        row("Meta", "Llama v2 70B Chat", "0.0007", "0.0009", 4096),
        row("Perplexity", "PPLX 70B Chat", "0.0007", "0.0028", 4096),
        row("", "Goliath 120B", "0.0125", "0.0125", 6144),
        row("", "Synthia 70B", "0.005", "0.005", 8192),
    };
  }();
  return catalog;
}

const ModelPricing& find_model(std::string_view name) {
  const std::string wanted = lowercase(name);
  for (const auto& m : model_catalog())
    if (lowercase(m.name) == wanted || lowercase(m.display_name()) == wanted) return m;
  throw Error(ErrorKind::NotFound, "unknown model '" + std::string(name) + "'");
}

TokenAmount quote_compute_cost(const ModelPricing& pricing, std::int64_t prompt_units,
                               std::int64_t completion_units) {
  if (prompt_units < 0 || completion_units < 0)
    throw Error(ErrorKind::Domain, "compute units must be non-negative");
  if (prompt_units > pricing.context_units)
    throw Error(ErrorKind::ContextExceeded, "prompt of " + std::to_string(prompt_units) +
                                                " units exceeds the " + std::to_string(pricing.context_units) +
                                                "-unit context of " + pricing.display_name());
  const __int128 numerator =
      static_cast<__int128>(prompt_units) * pricing.prompt_cost_per_1k.base_units() +
      static_cast<__int128>(completion_units) * pricing.completion_cost_per_1k.base_units();
  return TokenAmount::from_base_units(static_cast<std::int64_t>(numerator / 1000));
}

}  // namespace basedlab::econ
