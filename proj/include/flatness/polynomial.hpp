#pragma once

#include "flatness/errors.hpp"
#include "flatness/rational.hpp"
#include "flatness/variable.hpp"

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace flatness {

/// Power product of variables; factors sorted ascending by Var, exponents >= 1.
struct Monomial {
    std::vector<std::pair<Var, int>> factors;

    bool is_one() const { return factors.empty(); }
    int total_degree() const;
    int degree_in(const Var& v) const;
    Monomial without(const Var& v) const;

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Graded lexicographic comparison over the total Var order.
/// Returns negative / zero / positive like strcmp.
int cmp_monomial(const Monomial& a, const Monomial& b);

Monomial mono_mul(const Monomial& a, const Monomial& b);
std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b);
Monomial mono_pow(const Var& v, int e);

struct MonoGreater {
    bool operator()(const Monomial& a, const Monomial& b) const { return cmp_monomial(a, b) > 0; }
};

/// Multivariate polynomial over arbitrary-precision rationals. Terms are kept
/// in descending graded-lex order; zero coefficients are never stored, so the
/// representation is unique.
class Polynomial {
public:
    using TermMap = std::map<Monomial, Rational, MonoGreater>;

    Polynomial() = default;
    explicit Polynomial(const Rational& c);
    explicit Polynomial(const Var& v, int exp = 1);
    static Polynomial from_terms(TermMap terms);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
    bool is_one() const;
    std::optional<Rational> as_constant() const;

    const TermMap& terms() const { return terms_; }
    const Monomial& leading_monomial() const;
    const Rational& leading_coeff() const;

    int total_degree() const; // 0 for the zero polynomial
    int degree_in(const Var& v) const;
    void collect_vars(std::set<Var>& out) const;
    bool depends_on(const Var& v) const { return degree_in(v) > 0; }

    Polynomial operator-() const;
    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial scaled(const Rational& c) const;
    Polynomial pow(int e) const; // e >= 0

    Polynomial diff(const Var& v) const;

    /// Univariate view in v: degree -> coefficient polynomial (v-free).
    std::map<int, Polynomial> coeffs_in(const Var& v) const;

    /// Throws MathError if a variable of the polynomial is unbound.
    Rational evaluate(const std::map<Var, Rational>& point) const;

    /// gcd of |numerators| over lcm of denominators; positive, 0 for zero poly.
    Rational content() const;
    /// P divided by its content, signed so the leading coefficient is positive.
    Polynomial primitive_signed() const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    TermMap terms_;
};

std::optional<Polynomial> try_exact_div(const Polynomial& a, const Polynomial& b);
Polynomial exact_div(const Polynomial& a, const Polynomial& b); // throws InternalError if inexact

/// gcd over Q[vars], returned with integer coprime coefficients and positive
/// leading coefficient (the canonical associate).
Polynomial poly_gcd(const Polynomial& a, const Polynomial& b);

std::string to_string(const Polynomial& p);

} // namespace flatness
