#include "doctest.h"

#include "flatness/expr.hpp"

#include <random>

using namespace flatness;

namespace {

std::vector<Var> example_vocab() {
    return {Var("x1"), Var("x2"), Var("x3"), Var("x4"), Var("u1"), Var("u2")};
}

std::vector<Var> shifted_vocab() {
    return {Var("y1", 0), Var("y1", -2), Var("y2", 0), Var("y2", -1)};
}

/// Random expression built from the vocabulary with +, -, *, / and small
/// integer constants.
RationalExpr random_expr(std::mt19937_64& rng, const std::vector<Var>& vocab, int depth) {
    std::uniform_int_distribution<int> op(0, 5);
    std::uniform_int_distribution<int> leaf(0, 2);
    std::uniform_int_distribution<int> small(-4, 4);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    if (depth == 0 || leaf(rng) == 0) {
        if (leaf(rng) == 1) return RationalExpr::from_int(small(rng));
        return RationalExpr::variable(vocab[pick(rng)]);
    }
    RationalExpr a = random_expr(rng, vocab, depth - 1);
    RationalExpr b = random_expr(rng, vocab, depth - 1);
    switch (op(rng)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2:
    case 3: return a * b;
    default:
        if (b.is_zero()) return a;
        return a / b;
    }
}

Rational random_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 9);
    return Rational(num(rng), den(rng));
}

} // namespace

TEST_CASE("parsing the transition polynomial of the worked example") {
    RationalExpr e = parse_expr("x3 + x2*x4 + x1*u2", example_vocab());
    CHECK(e.num().terms().size() == 3);
    CHECK(e.den().is_one());
    CHECK(e == parse_expr("x1*u2 + x4*x2 + x3", example_vocab()));
}

TEST_CASE("zero literal parses to canonical zero") {
    RationalExpr e = parse_expr("0", example_vocab());
    CHECK(e.is_zero());
    CHECK(to_string(e) == "0");
}

TEST_CASE("rational expression with shift-indexed variables") {
    RationalExpr e = parse_expr("(y2@0 - y2@-1)/(y1@0 + y1@-2)", shifted_vocab());
    CHECK(!e.den().is_one());
    CHECK(e.depends_on(Var("y1", -2)));
    RationalExpr back = parse_expr(to_string(e), shifted_vocab());
    CHECK(back == e);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_expr("x1 + ", example_vocab()), ParseError);
    CHECK_THROWS_AS(parse_expr("x9", example_vocab()), ParseError);
    CHECK_THROWS_AS(parse_expr("x1/(x2 - x2)", example_vocab()), ParseError);
    CHECK_THROWS_AS(parse_expr("x1/0", example_vocab()), ParseError);
    try {
        parse_expr("x1 + y7", example_vocab());
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("differentiation") {
    auto vocab = example_vocab();
    SUBCASE("polynomial rule") {
        RationalExpr e = parse_expr("x3 + x2*x4 + x1*u2", vocab);
        CHECK(diff(e, Var("x2")) == parse_expr("x4", vocab));
    }
    SUBCASE("quotient rule on a shifted denominator") {
        auto yv = shifted_vocab();
        RationalExpr e = parse_expr("1/(y1@0 + y1@-2)", yv);
        RationalExpr expected = parse_expr("-1/(y1@0 + y1@-2)^2", yv);
        CHECK(diff(e, Var("y1", 0)) == expected);
    }
    SUBCASE("constants differentiate to zero") {
        CHECK(diff(RationalExpr::constant(Rational(7, 3)), Var("x1")).is_zero());
    }
}

TEST_CASE("substitution") {
    std::vector<Var> zv = {Var("z2"), Var("z3"), Var("z4")};
    auto vocab = example_vocab();
    SUBCASE("composition used by the output transfer") {
        RationalExpr e = parse_expr("z3 + z2*z4", zv);
        std::map<Var, RationalExpr> b{
            {Var("z3"), parse_expr("x3 + x2*x4 + x1*u2", vocab)},
            {Var("z2"), parse_expr("u2", vocab)},
            {Var("z4"), parse_expr("u1", vocab)},
        };
        CHECK(substitute(e, b) == parse_expr("x3 + x2*x4 + u2*x1 + u2*u1", vocab));
    }
    SUBCASE("identity binding") {
        RationalExpr v = RationalExpr::variable(Var("x1"));
        CHECK(substitute(v, {{Var("x1"), v}}) == v);
    }
    SUBCASE("constant evaluation") {
        std::vector<Var> ab = {Var("a"), Var("b")};
        RationalExpr e = parse_expr("(a+b)/(a-b)", ab);
        std::map<Var, RationalExpr> m{{Var("a"), RationalExpr::from_int(2)},
                                      {Var("b"), RationalExpr::from_int(1)}};
        CHECK(substitute(e, m) == RationalExpr::from_int(3));
    }
    SUBCASE("zero denominator is reported") {
        std::vector<Var> ab = {Var("a"), Var("b")};
        RationalExpr e = parse_expr("1/(a-b)", ab);
        std::map<Var, RationalExpr> m{{Var("a"), RationalExpr::variable(Var("b"))}};
        CHECK_THROWS_AS(substitute(e, m), MathError);
    }
}

TEST_CASE("is_zero on rearrangements") {
    auto vocab = example_vocab();
    CHECK((parse_expr("(x1+x2)-(x2+x1)", vocab)).is_zero());
    CHECK((parse_expr("x1*u2 - u2*x1", vocab)).is_zero());
    CHECK(!(parse_expr("x1 - u1", vocab)).is_zero());
}

TEST_CASE("canonicality agrees with evaluation at random points") {
    std::mt19937_64 rng(42);
    auto vocab = example_vocab();
    int checked = 0;
    for (int round = 0; round < 120; ++round) {
        RationalExpr e1 = random_expr(rng, vocab, 3);
        RationalExpr e2 = random_expr(rng, vocab, 3);
        // half the time compare against a rearrangement of e1 itself
        if (round % 2 == 0) e2 = (e1 + e2) - e2;
        RationalExpr d = e1 - e2;
        bool all_agree = true;
        int points = 0;
        for (int attempt = 0; attempt < 200 && points < 20; ++attempt) {
            std::map<Var, Rational> pt;
            for (const auto& v : vocab) pt.emplace(v, random_rational(rng));
            try {
                Rational lhs = evaluate(e1, pt), rhs = evaluate(e2, pt);
                ++points;
                if (lhs != rhs) all_agree = false;
            } catch (const MathError&) {
                // pole; resample
            }
        }
        if (points < 20) continue; // too many poles to judge; skip the round
        ++checked;
        CHECK(d.is_zero() == all_agree);
    }
    CHECK(checked >= 100);
}

TEST_CASE("chain rule through substitution") {
    std::mt19937_64 rng(7);
    std::vector<Var> vocab = {Var("v"), Var("t"), Var("s")};
    Var v("v"), t("t");
    for (int round = 0; round < 100; ++round) {
        RationalExpr e = random_expr(rng, vocab, 2);
        RationalExpr w = random_expr(rng, {Var("t"), Var("s")}, 2);
        std::map<Var, RationalExpr> bind{{v, w}};
        RationalExpr lhs = diff(substitute(e, bind), t);
        RationalExpr rhs = substitute(diff(e, v), bind) * diff(w, t) + substitute(diff(e, t), bind);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("print-parse round trip on random expressions") {
    std::mt19937_64 rng(99);
    auto vocab = shifted_vocab();
    for (int round = 0; round < 150; ++round) {
        RationalExpr e = random_expr(rng, vocab, 3);
        CHECK(parse_expr(to_string(e), vocab) == e);
    }
}

TEST_CASE("polynomial gcd properties") {
    std::mt19937_64 rng(5);
    auto vocab = example_vocab();
    for (int round = 0; round < 60; ++round) {
        Polynomial a = random_expr(rng, vocab, 2).num();
        Polynomial b = random_expr(rng, vocab, 2).num();
        Polynomial c = random_expr(rng, vocab, 1).num();
        Polynomial g = poly_gcd(a * c, b * c);
        if ((a * c).is_zero() && (b * c).is_zero()) continue;
        if (!c.is_zero()) CHECK(try_exact_div(g, poly_gcd(c, c)).has_value());
        if (!g.is_zero()) {
            CHECK(try_exact_div(a * c, g).has_value());
            CHECK(try_exact_div(b * c, g).has_value());
        }
    }
}
