#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace jetlaw {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long num, long den = 1) { return Rational(num, den); }

inline Integer rat_num(const Rational& r) { return numerator(r); }
inline Integer rat_den(const Rational& r) { return denominator(r); }

/// r^e for integer e (e may be negative; r must be nonzero then).
Rational rat_pow(const Rational& r, long e);

/// Largest s with s^2 | n (n > 0), found by exact-square test plus small
/// trial division. Partial extraction is fine; it only has to be deterministic.
Integer square_part(const Integer& n);

std::string rat_str(const Rational& r);

} // namespace jetlaw
