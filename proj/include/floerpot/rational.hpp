#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "floerpot/error.hpp"

namespace floerpot {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Energies live in Q_{>=0}; we reuse Rational and check signs at the borders.
using Exponent = Rational;

std::string rat_str(const Rational& r);

// Accepts "a", "-a", "a/b" with optional surrounding whitespace.
Rational parse_rational(const std::string& text);

Rational rat_pow(const Rational& base, long exponent);

Integer gcd_all(const std::vector<Integer>& xs);

inline Rational factorial(unsigned n) {
    Rational f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace floerpot
