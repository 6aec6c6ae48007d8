#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace inflogic {

/// Exact rational number with a 64-bit numerator and denominator, always kept
/// in lowest terms with a positive denominator.
///
/// Intermediate products are formed in 128-bit arithmetic; a result that does
/// not fit back into 64 bits raises std::overflow_error rather than wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const;
  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// Always "p/q", e.g. "0/1", "3/10".
  std::string to_string() const;
  /// "p" for integers, otherwise "p/q".
  std::string to_short_string() const;

  /// Accepts "p/q" or "k" (optional leading '-'); rejects zero denominators.
  static std::optional<Rational> parse(std::string_view text);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

Rational abs(const Rational& r);

/// Truncated subtraction max(a - b, 0).
Rational monus(const Rational& a, const Rational& b);
/// Truncated addition min(a + b, 1).
Rational clipped_sum(const Rational& a, const Rational& b);

std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace inflogic

template <>
struct std::hash<inflogic::Rational> {
  std::size_t operator()(const inflogic::Rational& r) const noexcept {
    return std::hash<std::int64_t>{}(r.num()) * 31 + std::hash<std::int64_t>{}(r.den());
  }
};
