#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "basedlab/token_amount.hpp"

namespace basedlab::detail {

using Wide = boost::multiprecision::int256_t;

std::vector<TokenAmount> apportion_wide(TokenAmount total, const std::vector<Wide>& weights);

}  // namespace basedlab::detail
