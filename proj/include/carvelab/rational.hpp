#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace carvelab {

/// Exact rational scalar used by the geometry and carving code.
/// Expression templates are off so `auto` and `?:` always yield values.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                              boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;

/// Parses "p/q", "p", or a decimal literal such as "-0.25" into an exact
/// rational. Throws ParseError on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Exact conversion of a finite double (every finite double is a dyadic
/// rational). Throws ParseError for NaN or infinity.
Rational rational_from_double(double value);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Canonical "p/q" form ("p" when the denominator is 1).
std::string to_string(const Rational& r);

/// Bit length of the larger of numerator and denominator.
std::size_t bit_size(const Rational& r);

}  // namespace carvelab
