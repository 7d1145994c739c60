#include "ctrleq/rational.hpp"

#include <limits>
#include <numeric>

#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

using int128 = __int128;

std::int64_t checked_narrow(int128 v, const char* op) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw NumericError(std::string("rational overflow in ") + op);
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw NumericError("rational with zero denominator");
  if (den < 0) {
    if (num == std::numeric_limits<std::int64_t>::min() ||
        den == std::numeric_limits<std::int64_t>::min()) {
      throw NumericError("rational overflow in normalization");
    }
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = num == 0 ? 1 : den;
}

Rational Rational::operator+(const Rational& o) const {
  // Reduce in 128 bits before narrowing so sums that cancel do not overflow.
  int128 num = int128(num_) * o.den_ + int128(o.num_) * den_;
  int128 den = int128(den_) * o.den_;
  int128 a = num < 0 ? -num : num;
  int128 b = den;
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Rational(checked_narrow(num, "addition"), checked_narrow(den, "addition"));
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  // Cross-cancel before multiplying to keep intermediates small.
  std::int64_t g1 = std::gcd(num_, o.den_);
  std::int64_t g2 = std::gcd(o.num_, den_);
  int128 num = int128(num_ / (g1 ? g1 : 1)) * (o.num_ / (g2 ? g2 : 1));
  int128 den = int128(den_ / (g2 ? g2 : 1)) * (o.den_ / (g1 ? g1 : 1));
  return Rational(checked_narrow(num, "multiplication"), checked_narrow(den, "multiplication"));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) throw NumericError("rational division by zero");
  return *this * Rational(o.den_, o.num_);
}

Rational Rational::operator-() const {
  if (num_ == std::numeric_limits<std::int64_t>::min()) {
    throw NumericError("rational overflow in negation");
  }
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

bool Rational::operator<(const Rational& o) const {
  return int128(num_) * o.den_ < int128(o.num_) * den_;
}

std::optional<Rational> Rational::parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }

  int128 digits = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool seen_dot = false;
  constexpr int128 kLimit = int128(1) << 96;  // headroom before the final narrow
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (digits > kLimit) return std::nullopt;
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return std::nullopt;

  int exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_neg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_neg = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size()) return std::nullopt;
    int value = 0;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c < '0' || c > '9') return std::nullopt;
      value = value * 10 + (c - '0');
      if (value > 64) return std::nullopt;
    }
    exponent = exp_neg ? -value : value;
  }
  if (pos != text.size()) return std::nullopt;

  int128 num = negative ? -digits : digits;
  int128 den = 1;
  int net = exponent - frac_digits;
  for (; net > 0; --net) {
    num *= 10;
    if (num > kLimit || num < -kLimit) return std::nullopt;
  }
  for (; net < 0; ++net) {
    den *= 10;
    if (den > kLimit) return std::nullopt;
  }

  try {
    return Rational(checked_narrow(num, "parse"), checked_narrow(den, "parse"));
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

}  // namespace ctrleq
