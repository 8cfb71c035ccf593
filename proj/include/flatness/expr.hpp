#pragma once

#include "flatness/polynomial.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace flatness {

/// Exact rational function over Q in shift-indexed variables, kept in a unique
/// canonical form: numerator and denominator are coprime polynomials with
/// integer coefficients of joint content one, and the leading coefficient of
/// the denominator is positive. Canonical equality is mathematical equality.
class RationalExpr {
public:
    RationalExpr(); // zero
    static RationalExpr constant(const Rational& c);
    static RationalExpr from_int(long n) { return constant(Rational(n)); }
    static RationalExpr variable(const Var& v);
    static RationalExpr from_poly(const Polynomial& p);
    /// Normalizes; throws MathError if `den` is the zero polynomial.
    static RationalExpr fraction(const Polynomial& num, const Polynomial& den);

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }
    std::optional<Rational> as_constant() const;
    std::set<Var> vars() const;
    bool depends_on(const Var& v) const { return num_.depends_on(v) || den_.depends_on(v); }

    RationalExpr operator-() const;
    friend RationalExpr operator+(const RationalExpr& a, const RationalExpr& b);
    friend RationalExpr operator-(const RationalExpr& a, const RationalExpr& b);
    friend RationalExpr operator*(const RationalExpr& a, const RationalExpr& b);
    /// Throws MathError if b is zero.
    friend RationalExpr operator/(const RationalExpr& a, const RationalExpr& b);
    RationalExpr pow(int e) const; // negative exponent inverts

    friend bool operator==(const RationalExpr&, const RationalExpr&) = default;

private:
    Polynomial num_, den_;
};

RationalExpr diff(const RationalExpr& e, const Var& v);
RationalExpr substitute(const RationalExpr& e, const std::map<Var, RationalExpr>& bindings);
/// Throws MathError if the denominator vanishes at the point.
Rational evaluate(const RationalExpr& e, const std::map<Var, Rational>& point);

std::string to_string(const RationalExpr& e);
std::ostream& operator<<(std::ostream& os, const RationalExpr& e);

/// Parses the expression grammar
///   expr := term (("+"|"-") term)* ; term := factor (("*"|"/") factor)* ;
///   factor := atom ("^" uint)? ; atom := uint | var | "(" expr ")" | "-" atom ;
///   var := ident ("@" sint)?
/// Every variable must occur in `vocabulary` exactly (name and shift).
RationalExpr parse_expr(const std::string& text, const std::vector<Var>& vocabulary);

/// Same grammar, but variables are checked by name only; any shift is allowed.
RationalExpr parse_expr_names(const std::string& text, const std::set<std::string>& names);

} // namespace flatness
