#include "carvelab/rational.hpp"

#include <cmath>

#include "carvelab/error.hpp"

namespace carvelab {

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

BigInt parse_integer(std::string_view s) {
  if (!is_integer_literal(s)) throw ParseError("malformed integer '" + std::string(s) + "'");
  if (s[0] == '+') s.remove_prefix(1);
  return BigInt(std::string(s));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = parse_integer(trim(text.substr(0, slash)));
    const BigInt den = parse_integer(trim(text.substr(slash + 1)));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    // Decimal literal: read exactly as digits / 10^k.
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    if (digits.empty() || digits == "-" || digits == "+") digits += "0";
    if (frac.empty() || !is_integer_literal(frac) || frac[0] == '-' || frac[0] == '+')
      throw ParseError("malformed decimal '" + std::string(text) + "'");
    const bool negative = !digits.empty() && digits[0] == '-';
    const BigInt whole = parse_integer(digits);
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const BigInt f(frac);
    const BigInt num = negative ? whole * scale - f : whole * scale + f;
    return Rational(num, scale);
  }
  return Rational(parse_integer(text));
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ParseError("non-finite number");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // Scale the mantissa up to an exact 53-bit integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  if (exponent > 0) {
    BigInt p = 1;
    p <<= exponent;
    r *= Rational(p);
  } else if (exponent < 0) {
    BigInt p = 1;
    p <<= -exponent;
    r /= Rational(p);
  }
  return r;
}

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::size_t bit_size(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  const std::size_t a = num == 0 ? 0 : boost::multiprecision::msb(abs(num)) + 1;
  const std::size_t b = boost::multiprecision::msb(den) + 1;
  return std::max(a, b);
}

}  // namespace carvelab
