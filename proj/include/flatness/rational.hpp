#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace flatness {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline int sign(const Rational& q) { return q.sign(); }

/// gcd of two nonnegative rationals: gcd of numerators over lcm of denominators.
inline Rational gcd_rational(const Rational& a, const Rational& b) {
    if (a == 0) return b;
    if (b == 0) return a;
    Integer n = gcd(numerator(a), numerator(b));
    Integer d = lcm(denominator(a), denominator(b));
    return Rational(n, d);
}

inline std::string to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

} // namespace flatness
