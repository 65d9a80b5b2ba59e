#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace mtype {

// Exact rational scalar. GMP keeps values canonical (reduced, positive
// denominator) as long as they are built through the helpers below.
using Rational = mpq_class;

/// Builds num/den in canonical form.
Rational make_rational(long num, long den = 1);

/// Parses "p/q", "p" or a decimal literal like "0.25" (exact expansion).
/// Throws ParseError on anything else.
Rational parse_rational(const std::string& text);

/// Canonical text form: "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

double to_double(const Rational& r);

int sign(const Rational& r);

Rational abs(const Rational& r);

/// 2^e for any integer e (negative exponents give 1/2^|e|).
Rational pow2(long e);

/// r^e for e >= 0.
Rational pow_int(const Rational& r, unsigned long e);

} // namespace mtype
