#include "basedlab/token_amount.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "basedlab/errors.hpp"

namespace basedlab {

namespace {

std::int64_t parse_digits(std::string_view digits, std::string_view whole) {
  std::int64_t value = 0;
  if (digits.empty()) return 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size())
    throw Error(ErrorKind::Domain, "invalid token amount '" + std::string(whole) + "'");
  return value;
}

}  // namespace

TokenAmount TokenAmount::parse(std::string_view text) {
  const std::string_view whole = text;
  if (text.empty() || text.front() == '-' || text.front() == '+')
    throw Error(ErrorKind::Domain, "invalid token amount '" + std::string(whole) + "'");
  const auto dot = text.find('.');
  const std::string_view int_part = text.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (int_part.empty() && frac_part.empty())
    throw Error(ErrorKind::Domain, "invalid token amount '" + std::string(whole) + "'");
  while (frac_part.size() > 9 && frac_part.back() == '0') frac_part.remove_suffix(1);
  if (frac_part.size() > 9)
    throw Error(ErrorKind::Domain, "token amount '" + std::string(whole) + "' has more than 9 decimals");

  const std::int64_t tokens = parse_digits(int_part, whole);
  std::int64_t frac = parse_digits(frac_part, whole);
  for (std::size_t k = frac_part.size(); k < 9; ++k) frac *= 10;
  if (tokens > std::numeric_limits<std::int64_t>::max() / kBaseUnitsPerToken - 1)
    throw Error(ErrorKind::Domain, "token amount '" + std::string(whole) + "' overflows");
  return TokenAmount(tokens * kBaseUnitsPerToken + frac);
}

std::string TokenAmount::to_string() const {
  const bool negative = units_ < 0;
  const std::uint64_t magnitude =
      negative ? static_cast<std::uint64_t>(-(units_ + 1)) + 1 : static_cast<std::uint64_t>(units_);
  std::string out = std::to_string(magnitude / kBaseUnitsPerToken);
  std::uint64_t frac = magnitude % kBaseUnitsPerToken;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 9 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += '.' + digits;
  }
  return negative ? "-" + out : out;
}

std::int64_t to_scaled_fraction(double fraction) {
  if (!std::isfinite(fraction)) throw Error(ErrorKind::Domain, "fraction is not finite");
  return std::llround(fraction * static_cast<double>(kFractionScale));
}

}  // namespace basedlab
