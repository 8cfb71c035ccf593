#include "flatness/expr.hpp"

#include <cctype>
#include <ostream>
#include <sstream>

namespace flatness {

RationalExpr::RationalExpr() : den_(Rational(1)) {}

RationalExpr RationalExpr::constant(const Rational& c) { return fraction(Polynomial(c), Polynomial(Rational(1))); }

RationalExpr RationalExpr::variable(const Var& v) { return from_poly(Polynomial(v)); }

RationalExpr RationalExpr::from_poly(const Polynomial& p) { return fraction(p, Polynomial(Rational(1))); }

RationalExpr RationalExpr::fraction(const Polynomial& num, const Polynomial& den) {
    if (den.is_zero()) throw MathError("division by zero expression");
    RationalExpr e;
    if (num.is_zero()) {
        e.num_ = Polynomial{};
        e.den_ = Polynomial(Rational(1));
        return e;
    }
    Polynomial n = num, d = den;
    Polynomial g = poly_gcd(n, d);
    if (!g.is_one() && !g.is_zero()) {
        n = exact_div(n, g);
        d = exact_div(d, g);
    }
    // joint scaling: integer coefficients, joint content one, positive
    // leading denominator coefficient
    Rational lambda = gcd_rational(n.content(), d.content());
    if (d.leading_coeff() < 0) lambda = -lambda;
    e.num_ = n.scaled(1 / lambda);
    e.den_ = d.scaled(1 / lambda);
    return e;
}

std::optional<Rational> RationalExpr::as_constant() const {
    auto n = num_.as_constant();
    auto d = den_.as_constant();
    if (n && d) return *n / *d;
    return std::nullopt;
}

std::set<Var> RationalExpr::vars() const {
    std::set<Var> out;
    num_.collect_vars(out);
    den_.collect_vars(out);
    return out;
}

RationalExpr RationalExpr::operator-() const {
    RationalExpr e;
    e.num_ = -num_;
    e.den_ = den_;
    return e;
}

RationalExpr operator+(const RationalExpr& a, const RationalExpr& b) {
    return RationalExpr::fraction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalExpr operator-(const RationalExpr& a, const RationalExpr& b) { return a + (-b); }

RationalExpr operator*(const RationalExpr& a, const RationalExpr& b) {
    return RationalExpr::fraction(a.num_ * b.num_, a.den_ * b.den_);
}

RationalExpr operator/(const RationalExpr& a, const RationalExpr& b) {
    if (b.is_zero()) throw MathError("division by zero expression");
    return RationalExpr::fraction(a.num_ * b.den_, a.den_ * b.num_);
}

RationalExpr RationalExpr::pow(int e) const {
    if (e < 0) {
        if (is_zero()) throw MathError("zero raised to a negative power");
        return fraction(den_.pow(-e), num_.pow(-e));
    }
    return fraction(num_.pow(e), den_.pow(e));
}

RationalExpr diff(const RationalExpr& e, const Var& v) {
    // quotient rule; canonicalization cancels the common factors
    return RationalExpr::fraction(e.num().diff(v) * e.den() - e.num() * e.den().diff(v), e.den() * e.den());
}

namespace {

RationalExpr substitute_poly(const Polynomial& p, const std::map<Var, RationalExpr>& bindings) {
    RationalExpr total;
    for (const auto& [m, c] : p.terms()) {
        RationalExpr term = RationalExpr::constant(c);
        for (const auto& [v, e] : m.factors) {
            auto it = bindings.find(v);
            RationalExpr base = it != bindings.end() ? it->second : RationalExpr::variable(v);
            term = term * base.pow(e);
        }
        total = total + term;
    }
    return total;
}

} // namespace

RationalExpr substitute(const RationalExpr& e, const std::map<Var, RationalExpr>& bindings) {
    RationalExpr n = substitute_poly(e.num(), bindings);
    RationalExpr d = substitute_poly(e.den(), bindings);
    if (d.is_zero()) throw MathError("substitution produced an identically zero denominator");
    return n / d;
}

Rational evaluate(const RationalExpr& e, const std::map<Var, Rational>& point) {
    Rational d = e.den().evaluate(point);
    if (d == 0) throw MathError("evaluation at a pole of the expression");
    return e.num().evaluate(point) / d;
}

std::string to_string(const RationalExpr& e) {
    std::string ns = to_string(e.num());
    if (e.den().is_one()) return ns;
    if (e.num().terms().size() > 1) ns = "(" + ns + ")";
    std::string ds = to_string(e.den());
    const auto& dt = e.den().terms();
    bool atomic_den = e.den().is_constant() ||
                      (dt.size() == 1 && dt.begin()->second == 1 && dt.begin()->first.factors.size() == 1);
    if (!atomic_den) ds = "(" + ds + ")";
    return ns + "/" + ds;
}

std::ostream& operator<<(std::ostream& os, const RationalExpr& e) { return os << to_string(e); }

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;
    const std::vector<Var>* vocab_exact;        // exact (name, shift) pairs
    const std::set<std::string>* vocab_names;   // names only

    explicit Parser(const std::string& t) : text(t), vocab_exact(nullptr), vocab_names(nullptr) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    Integer parse_uint() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) throw ParseError("expected a number", pos);
        return Integer(text.substr(start, pos - start));
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos;
        if (pos >= text.size() || !std::isalpha(static_cast<unsigned char>(text[pos])))
            throw ParseError("expected an identifier", pos);
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        return text.substr(start, pos - start);
    }

    RationalExpr parse_var() {
        std::size_t start = pos;
        std::string name = parse_ident();
        int shift = 0;
        if (peek() == '@') {
            ++pos;
            skip_ws();
            int s = 1;
            if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
                if (text[pos] == '-') s = -1;
                ++pos;
            }
            Integer mag = parse_uint();
            if (mag > 1000) throw ParseError("shift out of range", start);
            shift = s * static_cast<int>(mag);
        }
        Var v{name, shift};
        if (vocab_exact) {
            bool known = false;
            for (const auto& w : *vocab_exact)
                if (w == v) {
                    known = true;
                    break;
                }
            if (!known) throw ParseError("unknown variable '" + to_string(v) + "'", start);
        } else if (vocab_names) {
            if (!vocab_names->count(name))
                throw ParseError("unknown variable '" + name + "'", start);
        }
        return RationalExpr::variable(v);
    }

    RationalExpr parse_atom() {
        char c = peek();
        if (c == '(') {
            ++pos;
            RationalExpr e = parse_sum();
            expect(')');
            return e;
        }
        if (c == '-') {
            ++pos;
            return -parse_atom();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return RationalExpr::constant(Rational(parse_uint()));
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_var();
        throw ParseError("unexpected character", pos);
    }

    RationalExpr parse_factor() {
        RationalExpr base = parse_atom();
        if (peek() == '^') {
            std::size_t at = pos;
            ++pos;
            Integer e = parse_uint();
            if (e > 64) throw ParseError("exponent too large", at);
            return base.pow(static_cast<int>(e));
        }
        return base;
    }

    RationalExpr parse_term() {
        RationalExpr acc = parse_factor();
        while (true) {
            char c = peek();
            if (c == '*') {
                ++pos;
                acc = acc * parse_factor();
            } else if (c == '/') {
                std::size_t at = pos;
                ++pos;
                RationalExpr d = parse_factor();
                if (d.is_zero()) throw ParseError("division by zero", at);
                acc = acc / d;
            } else {
                break;
            }
        }
        return acc;
    }

    RationalExpr parse_sum() {
        RationalExpr acc = parse_term();
        while (true) {
            char c = peek();
            if (c == '+') {
                ++pos;
                acc = acc + parse_term();
            } else if (c == '-') {
                ++pos;
                acc = acc - parse_term();
            } else {
                break;
            }
        }
        return acc;
    }

    RationalExpr run() {
        RationalExpr e = parse_sum();
        skip_ws();
        if (pos != text.size()) throw ParseError("trailing input", pos);
        return e;
    }
};

} // namespace

RationalExpr parse_expr(const std::string& text, const std::vector<Var>& vocabulary) {
    Parser p(text);
    p.vocab_exact = &vocabulary;
    return p.run();
}

RationalExpr parse_expr_names(const std::string& text, const std::set<std::string>& names) {
    Parser p(text);
    p.vocab_names = &names;
    return p.run();
}

} // namespace flatness
