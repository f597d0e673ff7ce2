#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "basedlab/token_amount.hpp"

namespace basedlab {

/// Largest-remainder apportionment of `total` in proportion to non-negative
/// integer weights. Leftover units go to the largest fractional parts; ties
/// favour the lower index. The result sums to `total` exactly.
/// Throws Degenerate if every weight is zero and total > 0.
std::vector<TokenAmount> apportion(TokenAmount total, std::span<const std::int64_t> weights);

/// Same, with real-valued weights snapped to a 2^52 grid relative to the
/// largest weight.
std::vector<TokenAmount> apportion_real(TokenAmount total, std::span<const double> weights);

}  // namespace basedlab
