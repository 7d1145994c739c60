#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace ctrleq {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Kept normalized (gcd 1, positive denominator). All operations check for
/// overflow and throw NumericError, so callers can fall back to floating
/// point instead of silently losing exactness.
class Rational {
 public:
  constexpr Rational() = default;
  explicit Rational(std::int64_t value) : num_(value) {}
  Rational(std::int64_t num, std::int64_t den);

  /// Parses a plain decimal literal ("-0.25", "1e-3", "42") into an exact
  /// rational. Returns nullopt when the literal does not fit in 64 bits.
  static std::optional<Rational> parse_decimal(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace ctrleq
