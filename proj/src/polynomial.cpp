#include "flatness/polynomial.hpp"

#include <algorithm>
#include <sstream>

namespace flatness {

int Monomial::total_degree() const {
    int d = 0;
    for (const auto& [v, e] : factors) d += e;
    return d;
}

int Monomial::degree_in(const Var& v) const {
    for (const auto& [w, e] : factors)
        if (w == v) return e;
    return 0;
}

Monomial Monomial::without(const Var& v) const {
    Monomial out;
    out.factors.reserve(factors.size());
    for (const auto& f : factors)
        if (f.first != v) out.factors.push_back(f);
    return out;
}

int cmp_monomial(const Monomial& a, const Monomial& b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db ? -1 : 1;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        const auto& [va, ea] = a.factors[i];
        const auto& [vb, eb] = b.factors[j];
        if (va == vb) {
            if (ea != eb) return ea > eb ? 1 : -1;
            ++i, ++j;
        } else if (va < vb) {
            return 1; // a has positive exponent on an earlier variable
        } else {
            return -1;
        }
    }
    if (i < a.factors.size()) return 1;
    if (j < b.factors.size()) return -1;
    return 0;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].first < b.factors[j].first)) {
            out.factors.push_back(a.factors[i++]);
        } else if (i == a.factors.size() || b.factors[j].first < a.factors[i].first) {
            out.factors.push_back(b.factors[j++]);
        } else {
            out.factors.emplace_back(a.factors[i].first, a.factors[i].second + b.factors[j].second);
            ++i, ++j;
        }
    }
    return out;
}

std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0;
    for (const auto& [v, e] : b.factors) {
        while (i < a.factors.size() && a.factors[i].first < v) out.factors.push_back(a.factors[i++]);
        if (i == a.factors.size() || a.factors[i].first != v || a.factors[i].second < e) return std::nullopt;
        if (a.factors[i].second > e) out.factors.emplace_back(v, a.factors[i].second - e);
        ++i;
    }
    while (i < a.factors.size()) out.factors.push_back(a.factors[i++]);
    return out;
}

Monomial mono_pow(const Var& v, int e) {
    Monomial m;
    if (e > 0) m.factors.emplace_back(v, e);
    return m;
}

Polynomial::Polynomial(const Rational& c) {
    if (c != 0) terms_.emplace(Monomial{}, c);
}

Polynomial::Polynomial(const Var& v, int exp) {
    if (exp > 0)
        terms_.emplace(mono_pow(v, exp), Rational(1));
    else
        terms_.emplace(Monomial{}, Rational(1));
}

Polynomial Polynomial::from_terms(TermMap terms) {
    Polynomial p;
    for (auto& [m, c] : terms)
        if (c != 0) p.terms_.emplace(m, std::move(c));
    return p;
}

bool Polynomial::is_one() const {
    return terms_.size() == 1 && terms_.begin()->first.is_one() && terms_.begin()->second == 1;
}

std::optional<Rational> Polynomial::as_constant() const {
    if (terms_.empty()) return Rational(0);
    if (terms_.size() == 1 && terms_.begin()->first.is_one()) return terms_.begin()->second;
    return std::nullopt;
}

const Monomial& Polynomial::leading_monomial() const {
    if (terms_.empty()) throw InternalError("leading_monomial of zero polynomial");
    return terms_.begin()->first;
}

const Rational& Polynomial::leading_coeff() const {
    if (terms_.empty()) throw InternalError("leading_coeff of zero polynomial");
    return terms_.begin()->second;
}

int Polynomial::total_degree() const {
    return terms_.empty() ? 0 : terms_.begin()->first.total_degree();
}

int Polynomial::degree_in(const Var& v) const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree_in(v));
    return d;
}

void Polynomial::collect_vars(std::set<Var>& out) const {
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m.factors) out.insert(v);
}

Polynomial Polynomial::operator-() const {
    Polynomial out;
    for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial::TermMap acc = a.terms_;
    for (const auto& [m, c] : b.terms_) {
        auto [it, fresh] = acc.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) acc.erase(it);
        }
    }
    Polynomial out;
    out.terms_ = std::move(acc);
    return out;
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial::TermMap acc;
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            Monomial m = mono_mul(ma, mb);
            Rational c = ca * cb;
            auto [it, fresh] = acc.emplace(std::move(m), c);
            if (!fresh) {
                it->second += c;
                if (it->second == 0) acc.erase(it);
            }
        }
    }
    Polynomial out;
    out.terms_ = std::move(acc);
    return out;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial out;
    if (c == 0) return out;
    for (const auto& [m, k] : terms_) out.terms_.emplace(m, k * c);
    return out;
}

Polynomial Polynomial::pow(int e) const {
    if (e < 0) throw InternalError("Polynomial::pow with negative exponent");
    Polynomial result{Rational(1)};
    Polynomial base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

Polynomial Polynomial::diff(const Var& v) const {
    TermMap acc;
    for (const auto& [m, c] : terms_) {
        int e = m.degree_in(v);
        if (e == 0) continue;
        Monomial dm = mono_mul(m.without(v), mono_pow(v, e - 1));
        Rational dc = c * e;
        auto [it, fresh] = acc.emplace(std::move(dm), dc);
        if (!fresh) {
            it->second += dc;
            if (it->second == 0) acc.erase(it);
        }
    }
    Polynomial out;
    out.terms_ = std::move(acc);
    return out;
}

std::map<int, Polynomial> Polynomial::coeffs_in(const Var& v) const {
    std::map<int, Polynomial> buckets;
    for (const auto& [m, c] : terms_) {
        int e = m.degree_in(v);
        buckets[e] = buckets[e] + Polynomial::from_terms({{m.without(v), c}});
    }
    return buckets;
}

Rational Polynomial::evaluate(const std::map<Var, Rational>& point) const {
    Rational total = 0;
    for (const auto& [m, c] : terms_) {
        Rational term = c;
        for (const auto& [v, e] : m.factors) {
            auto it = point.find(v);
            if (it == point.end()) throw MathError("unbound variable in evaluation: " + to_string(v));
            Rational p = 1;
            for (int k = 0; k < e; ++k) p *= it->second;
            term *= p;
        }
        total += term;
    }
    return total;
}

Rational Polynomial::content() const {
    if (terms_.empty()) return 0;
    Integer num = 0, den = 1;
    for (const auto& [m, c] : terms_) {
        num = gcd(num, abs(numerator(c)));
        den = lcm(den, denominator(c));
    }
    return Rational(num, den);
}

Polynomial Polynomial::primitive_signed() const {
    if (terms_.empty()) return *this;
    Rational c = content();
    if (leading_coeff() < 0) c = -c;
    return scaled(1 / c);
}

std::optional<Polynomial> try_exact_div(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) return std::nullopt;
    Polynomial r = a;
    Polynomial::TermMap q;
    while (!r.is_zero()) {
        auto mq = mono_div(r.leading_monomial(), b.leading_monomial());
        if (!mq) return std::nullopt;
        Rational cq = r.leading_coeff() / b.leading_coeff();
        q.emplace(*mq, cq);
        r = r - Polynomial::from_terms({{*mq, cq}}) * b;
    }
    return Polynomial::from_terms(std::move(q));
}

Polynomial exact_div(const Polynomial& a, const Polynomial& b) {
    auto q = try_exact_div(a, b);
    if (!q) throw InternalError("exact polynomial division failed");
    return *q;
}

namespace {

Polynomial lc_in(const Polynomial& p, const Var& v) {
    int d = p.degree_in(v);
    Polynomial::TermMap acc;
    for (const auto& [m, c] : p.terms())
        if (m.degree_in(v) == d) acc.emplace(m.without(v), c);
    return Polynomial::from_terms(std::move(acc));
}

/// Pseudo-remainder of a by b with respect to v (up to a power of lc(b)).
Polynomial prem(const Polynomial& a, const Polynomial& b, const Var& v) {
    int db = b.degree_in(v);
    Polynomial l = lc_in(b, v);
    Polynomial r = a;
    while (!r.is_zero() && r.degree_in(v) >= db) {
        int s = r.degree_in(v) - db;
        Polynomial lr = lc_in(r, v);
        r = l * r - lr * Polynomial(v, s) * b;
    }
    return r;
}

Polynomial gcd_impl(const Polynomial& a, const Polynomial& b);

/// gcd of the univariate coefficients of p in v (a polynomial in fewer vars).
Polynomial content_in(const Polynomial& p, const Var& v) {
    Polynomial acc;
    for (const auto& [d, coeff] : p.coeffs_in(v)) {
        acc = gcd_impl(acc, coeff);
        if (acc.is_one()) break;
    }
    return acc;
}

Polynomial primitive_part_in(const Polynomial& p, const Var& v) {
    if (p.is_zero()) return p;
    Polynomial c = content_in(p, v);
    return exact_div(p, c).primitive_signed();
}

Polynomial gcd_impl(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero()) return b.primitive_signed();
    if (b.is_zero()) return a.primitive_signed();
    if (a.is_constant() || b.is_constant()) return Polynomial(Rational(1));

    std::set<Var> vars;
    a.collect_vars(vars);
    b.collect_vars(vars);
    const Var v = *vars.rbegin();

    int da = a.degree_in(v), db = b.degree_in(v);
    if (da == 0) return gcd_impl(a, content_in(b, v));
    if (db == 0) return gcd_impl(content_in(a, v), b);

    Polynomial ca = content_in(a, v);
    Polynomial cb = content_in(b, v);
    Polynomial c = gcd_impl(ca, cb);

    // primitive PRS on the primitive parts
    Polynomial p = exact_div(a, ca).primitive_signed();
    Polynomial q = exact_div(b, cb).primitive_signed();
    if (p.degree_in(v) < q.degree_in(v)) std::swap(p, q);
    while (true) {
        Polynomial r = prem(p, q, v);
        if (r.is_zero()) break;
        if (r.degree_in(v) == 0) {
            q = Polynomial(Rational(1));
            break;
        }
        p = q;
        q = primitive_part_in(r, v);
    }
    Polynomial g = q.is_constant() ? Polynomial(Rational(1)) : primitive_part_in(q, v);
    return (c * g).primitive_signed();
}

} // namespace

Polynomial poly_gcd(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() && b.is_zero()) return Polynomial{};
    return gcd_impl(a.primitive_signed(), b.primitive_signed()).primitive_signed();
}

std::string to_string(const Polynomial& p) {
    if (p.is_zero()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        Rational a = c < 0 ? Rational(-c) : c;
        bool leading_minus = false;
        if (first) {
            if (c < 0) {
                out << "-";
                leading_minus = true;
            }
            first = false;
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        bool wrote_coeff = false;
        // a leading unary minus binds to the first atom only, so "-x^2" would
        // reparse as (-x)^2; force an explicit coefficient in that case
        bool unsafe_power = leading_minus && !m.is_one() && m.factors.front().second >= 2;
        if (m.is_one() || a != 1 || unsafe_power) {
            out << to_string(a);
            wrote_coeff = true;
        }
        bool first_factor = true;
        for (const auto& [v, e] : m.factors) {
            if (wrote_coeff || !first_factor) out << "*";
            out << to_string(v);
            if (e > 1) out << "^" << e;
            first_factor = false;
            wrote_coeff = true;
        }
    }
    return out.str();
}

} // namespace flatness
