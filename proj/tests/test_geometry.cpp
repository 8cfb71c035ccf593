#include "doctest.h"

#include "flatness/geometry.hpp"

using namespace flatness;

namespace {

std::string data_path(const std::string& name) { return std::string(FLATNESS_DATA_DIR) + "/" + name; }

SystemModel example1() { return ensure_inverse(load_system_file(data_path("example1.json"))); }
SystemModel mirrored() { return build_associated(example1()); }
SystemModel integrator() { return ensure_inverse(load_system_file(data_path("integrator.json"))); }

VectorField field(const SystemModel& s, const std::string& text) {
    std::set<std::string> names;
    for (const auto& v : s.chart()) names.insert(v.name);
    // "a*d_x1 + b*d_x2" style is clumsy to parse; build from per-coordinate map
    // instead: text like "x1:1, x3:-u2"
    auto trim = [](std::string t) {
        while (!t.empty() && t.front() == ' ') t.erase(t.begin());
        while (!t.empty() && t.back() == ' ') t.pop_back();
        return t;
    };
    VectorField f{s.chart(), std::vector<RationalExpr>(s.chart().size())};
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t colon = text.find(':', pos);
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string var = trim(text.substr(pos, colon - pos));
        std::string coeff = text.substr(colon + 1, comma - colon - 1);
        for (std::size_t i = 0; i < f.chart.size(); ++i)
            if (f.chart[i].name == var) f.coeffs[i] = parse_expr_names(coeff, names);
        pos = comma + (comma < text.size() ? 1 : 0);
    }
    return f;
}

Distribution dist(const SystemModel& s, const std::vector<std::string>& fields) {
    std::vector<std::vector<RationalExpr>> rows;
    for (const auto& t : fields) rows.push_back(field(s, t).coeffs);
    return make_distribution(s.chart(), rows);
}

} // namespace

TEST_CASE("kernel distribution of the worked example") {
    SystemModel s = example1();
    Distribution v = kernel_distribution(s);
    CHECK(v.dim() == 2);
    CHECK(span_equal(v, dist(s, {"x1:1, x3:-u2", "x2:1, x3:-x4"})));
}

TEST_CASE("kernel distribution of the integrator") {
    SystemModel s = integrator();
    Distribution v = kernel_distribution(s);
    CHECK(v.dim() == 1);
    CHECK(span_equal(v, dist(s, {"x1:1"})));
}

TEST_CASE("kernel distribution of the mirrored system") {
    SystemModel a = mirrored();
    Distribution v = kernel_distribution(a);
    CHECK(v.dim() == 2);
    CHECK(span_equal(v, dist(a, {"z2:1, z3:v1", "z4:1"})));
}

TEST_CASE("lie brackets") {
    SystemModel a = mirrored();
    SUBCASE("[d_z2 - z4 d_z3, d_z4] = d_z3") {
        VectorField b = lie_bracket(field(a, "z2:1, z3:-z4"), field(a, "z4:1"));
        CHECK(span_equal(make_distribution(a.chart(), {b.coeffs}), dist(a, {"z3:1"})));
        CHECK(b.coeffs[2] == RationalExpr::from_int(1));
    }
    SUBCASE("[v, v] = 0") {
        VectorField v = field(a, "z2:1, z3:-z4*z1");
        for (const auto& c : lie_bracket(v, v).coeffs) CHECK(c.is_zero());
    }
    SUBCASE("constant fields commute") {
        VectorField b = lie_bracket(field(a, "v1:1"), field(a, "v2:1"));
        for (const auto& c : b.coeffs) CHECK(c.is_zero());
    }
}

TEST_CASE("pushforward") {
    SUBCASE("input direction of the mirrored system projects onto the z2-column") {
        SystemModel a = mirrored();
        Distribution d0 = dist(a, {"v2:1"});
        Distribution delta = pushforward_distribution(a, d0);
        REQUIRE(delta.dim() == 1);
        std::vector<Var> plus;
        for (const auto& st : a.states) plus.emplace_back(st.name, 1);
        std::set<std::string> names{"z1", "z2", "z3", "z4"};
        // f_*(d_v2) = d_z2+ - z1 d_z3+ with z1 re-expressed as z4+
        CHECK(delta.basis[0].coeffs[1] == RationalExpr::from_int(1));
        CHECK(delta.basis[0].coeffs[2] == -RationalExpr::variable(Var("z4", 1)));
    }
    SUBCASE("span{d_u} maps to span{d_x+} for the integrator") {
        SystemModel s = integrator();
        Distribution delta = pushforward_distribution(s, dist(s, {"u1:1"}));
        REQUIRE(delta.dim() == 1);
        CHECK(delta.basis[0].coeffs[0] == RationalExpr::from_int(1));
    }
    SUBCASE("the kernel pushes forward to zero") {
        SystemModel s = example1();
        Distribution delta = pushforward_distribution(s, kernel_distribution(s));
        CHECK(delta.dim() == 0);
    }
}

TEST_CASE("largest projectable subdistribution") {
    SUBCASE("E_0 of the worked example gives span{d_u1}") {
        SystemModel s = example1();
        Distribution d = largest_projectable_subdistribution(s, dist(s, {"u1:1", "u2:1"}));
        CHECK(span_equal(d, dist(s, {"u1:1"})));
    }
    SUBCASE("E_0 of the mirrored system gives span{d_v2}") {
        SystemModel a = mirrored();
        Distribution d = largest_projectable_subdistribution(a, dist(a, {"v1:1", "v2:1"}));
        CHECK(span_equal(d, dist(a, {"v2:1"})));
    }
    SUBCASE("E_1 of the mirrored system is entirely projectable") {
        SystemModel a = mirrored();
        Distribution e1 = dist(a, {"z2:1, z3:-z4", "v1:1", "v2:1"});
        Distribution d = largest_projectable_subdistribution(a, e1);
        CHECK(span_equal(d, e1));
    }
}

TEST_CASE("lift and extend") {
    SystemModel s = example1();
    SUBCASE("delta = span{d_x4+} lifts to span{d_x4, d_u1, d_u2}") {
        std::vector<Var> plus;
        for (const auto& st : s.states) plus.emplace_back(st.name, 1);
        std::vector<std::vector<RationalExpr>> rows(1, std::vector<RationalExpr>(4));
        rows[0][3] = RationalExpr::from_int(1);
        Distribution delta{plus, {}};
        delta = make_distribution(plus, rows);
        Distribution e = lift_and_extend(delta, s);
        CHECK(span_equal(e, dist(s, {"x4:1", "u1:1", "u2:1"})));
    }
    SUBCASE("empty pushforward lifts to the input directions") {
        std::vector<Var> plus;
        for (const auto& st : s.states) plus.emplace_back(st.name, 1);
        Distribution e = lift_and_extend(make_distribution(plus, {}), s);
        CHECK(e.dim() == s.m());
        CHECK(span_equal(e, dist(s, {"u1:1", "u2:1"})));
    }
}

TEST_CASE("forward flatness test on the worked example") {
    SequenceRecord rec = forward_flatness_test(example1());
    CHECK(rec.dims == std::vector<std::size_t>{2, 3, 3});
    CHECK(rec.kbar == 2);
    CHECK(!rec.forward_flat);
    SystemModel s = example1();
    CHECK(span_equal(rec.steps[1].E, dist(s, {"x4:1", "u1:1", "u2:1"})));
    REQUIRE(rec.steps[0].D);
    REQUIRE(rec.steps[1].D);
    CHECK(span_equal(*rec.steps[0].D, dist(s, {"u1:1"})));
    CHECK(span_equal(*rec.steps[1].D, dist(s, {"u1:1"})));
    for (const auto& step : rec.steps) CHECK(step.involutive);
}

TEST_CASE("forward flatness test on the mirrored system") {
    SystemModel a = mirrored();
    SequenceRecord rec = forward_flatness_test(a);
    CHECK(rec.dims == std::vector<std::size_t>{2, 3, 5, 6});
    CHECK(rec.forward_flat);
    CHECK(rec.kbar == 4);
    CHECK(span_equal(rec.steps[1].E, dist(a, {"z2:1, z3:-z4", "v1:1", "v2:1"})));
    CHECK(span_equal(rec.steps[2].E, dist(a, {"z1:1", "z2:1", "z3:1", "v1:1", "v2:1"})));
    REQUIRE(rec.steps[0].D);
    CHECK(span_equal(*rec.steps[0].D, dist(a, {"v2:1"})));
    CHECK(span_equal(*rec.steps[1].D, rec.steps[1].E));
    CHECK(span_equal(*rec.steps[2].D, rec.steps[2].E));
}

TEST_CASE("static feedback linearization degeneracy on the integrator") {
    SequenceRecord rec = forward_flatness_test(integrator());
    CHECK(rec.dims == std::vector<std::size_t>{1, 2});
    CHECK(rec.forward_flat);
    // every D_k equals E_k: the sequence degenerates to the classical one
    for (std::size_t k = 0; k + 1 < rec.steps.size(); ++k) {
        REQUIRE(rec.steps[k].D);
        CHECK(span_equal(*rec.steps[k].D, rec.steps[k].E));
    }
}

TEST_CASE("uncontrollable negative control stalls below n + m") {
    SystemModel s = ensure_inverse(load_system_file(data_path("uncontrollable.json")));
    SequenceRecord rec = forward_flatness_test(s);
    CHECK(rec.dims == std::vector<std::size_t>{1, 2, 2});
    CHECK(!rec.forward_flat);
}

TEST_CASE("a sequence can stall with an empty projectable subdistribution") {
    // f = (u, x2 + x1 u): no input direction is projectable, so E_1 = E_0
    SystemModel s = ensure_inverse(load_system(
        R"({"name":"stall","states":["x1","x2"],"inputs":["u1"],"f":["u1","x2 + x1*u1"]})"));
    Distribution e0 = dist(s, {"u1:1"});
    Distribution d0 = largest_projectable_subdistribution(s, e0);
    CHECK(d0.dim() == 0);
    SequenceRecord rec = forward_flatness_test(s);
    CHECK(rec.dims == std::vector<std::size_t>{1, 1});
    CHECK(rec.kbar == 1);
    CHECK(!rec.forward_flat);
}

TEST_CASE("nestedness holds along the computed sequences") {
    for (auto sys : {example1(), mirrored()}) {
        SequenceRecord rec = forward_flatness_test(sys);
        for (std::size_t k = 0; k + 1 < rec.steps.size(); ++k)
            for (const auto& f : rec.steps[k].E.basis) CHECK(span_contains(rec.steps[k + 1].E, f));
    }
}
