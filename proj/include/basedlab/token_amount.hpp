#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace basedlab {

/// Fixed-point quantity of $BASED or Pepecoin, counted in 1e-9 units.
class TokenAmount {
 public:
  static constexpr std::int64_t kBaseUnitsPerToken = 1'000'000'000;

  constexpr TokenAmount() = default;

  static constexpr TokenAmount from_base_units(std::int64_t units) { return TokenAmount(units); }
  static constexpr TokenAmount from_tokens(std::int64_t tokens) {
    return TokenAmount(tokens * kBaseUnitsPerToken);
  }
  /// Exact decimal parse, e.g. "0.01953125" or "31536000". At most nine
  /// fractional digits; negative values are rejected.
  static TokenAmount parse(std::string_view text);

  constexpr std::int64_t base_units() const { return units_; }
  constexpr bool is_zero() const { return units_ == 0; }

  /// Shortest exact decimal rendering ("2.5", "10", "0.01953125").
  std::string to_string() const;
  /// Lossy; for reporting only.
  double to_double() const { return static_cast<double>(units_) / kBaseUnitsPerToken; }

  constexpr TokenAmount& operator+=(TokenAmount other) {
    units_ += other.units_;
    return *this;
  }
  constexpr TokenAmount& operator-=(TokenAmount other) {
    units_ -= other.units_;
    return *this;
  }
  friend constexpr TokenAmount operator+(TokenAmount a, TokenAmount b) { return a += b; }
  friend constexpr TokenAmount operator-(TokenAmount a, TokenAmount b) { return a -= b; }
  friend constexpr TokenAmount operator*(TokenAmount a, std::int64_t k) {
    return TokenAmount(a.units_ * k);
  }
  friend constexpr auto operator<=>(TokenAmount, TokenAmount) = default;

 private:
  constexpr explicit TokenAmount(std::int64_t units) : units_(units) {}

  std::int64_t units_ = 0;
};

/// Fractions (owner share, performance, caps) are snapped onto a 1e-12 grid
/// so token arithmetic stays exact.
inline constexpr std::int64_t kFractionScale = 1'000'000'000'000;

/// Round a fraction onto the 1e-12 grid. Throws Domain if not finite.
std::int64_t to_scaled_fraction(double fraction);

}  // namespace basedlab
