#include "basedlab/apportion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apportion_detail.hpp"
#include "basedlab/errors.hpp"

namespace basedlab {

namespace detail {

std::vector<TokenAmount> apportion_wide(TokenAmount total, const std::vector<Wide>& weights) {
  if (total.base_units() < 0) throw Error(ErrorKind::Domain, "cannot apportion a negative amount");
  std::vector<TokenAmount> out(weights.size());
  if (total.is_zero()) return out;

  Wide weight_sum = 0;
  for (const Wide& w : weights) {
    if (w < 0) throw Error(ErrorKind::Domain, "apportionment weights must be non-negative");
    weight_sum += w;
  }
  if (weight_sum == 0) throw Error(ErrorKind::Degenerate, "all apportionment weights are zero");

  const Wide units = total.base_units();
  std::vector<Wide> remainders(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Wide numerator = units * weights[i];
    const auto share = static_cast<std::int64_t>(numerator / weight_sum);
    remainders[i] = numerator % weight_sum;
    out[i] = TokenAmount::from_base_units(share);
    assigned += share;
  }

  std::int64_t leftover = total.base_units() - assigned;
  if (leftover == 0) return out;
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  // leftover < number of positive weights, so one pass suffices.
  for (std::size_t k = 0; leftover > 0; ++k, --leftover)
    out[order[k]] += TokenAmount::from_base_units(1);
  return out;
}

}  // namespace detail

std::vector<TokenAmount> apportion(TokenAmount total, std::span<const std::int64_t> weights) {
  std::vector<detail::Wide> wide(weights.begin(), weights.end());
  return detail::apportion_wide(total, wide);
}

std::vector<TokenAmount> apportion_real(TokenAmount total, std::span<const double> weights) {
  double largest = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorKind::Domain, "apportionment weights must be finite and non-negative");
    largest = std::max(largest, w);
  }
  if (largest == 0.0 && !total.is_zero())
    throw Error(ErrorKind::Degenerate, "all apportionment weights are zero");
  std::vector<detail::Wide> wide(weights.size());
  constexpr double kGrid = 4503599627370496.0;  // 2^52
  for (std::size_t i = 0; i < weights.size(); ++i)
    wide[i] = largest == 0.0 ? 0 : std::llround(weights[i] / largest * kGrid);
  return detail::apportion_wide(total, wide);
}

}  // namespace basedlab
