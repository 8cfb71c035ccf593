#include "flatness/system.hpp"

#include "flatness/elimination.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace flatness {

std::vector<Var> SystemModel::chart() const {
    std::vector<Var> out = states;
    out.insert(out.end(), inputs.begin(), inputs.end());
    return out;
}

namespace {

std::vector<Var> to_vars(const std::vector<std::string>& names) {
    std::vector<Var> out;
    out.reserve(names.size());
    for (const auto& n : names) out.emplace_back(n, 0);
    return out;
}

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw SchemaError("missing or non-array field '" + key + "'");
    std::vector<std::string> out;
    for (const auto& e : j.at(key)) {
        if (!e.is_string()) throw SchemaError("field '" + key + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

void check_identifiers(const std::vector<std::string>& names, const std::string& what) {
    for (const auto& n : names)
        if (!valid_identifier(n)) throw SchemaError("invalid " + what + " name '" + n + "'");
}

/// Fresh zeta names: zeta1..zetam, switching prefix on collision.
std::vector<Var> default_zeta_names(const SystemModel& s) {
    std::set<std::string> taken;
    for (const auto& v : s.states) taken.insert(v.name);
    for (const auto& v : s.inputs) taken.insert(v.name);
    for (const char* prefix : {"zeta", "zeta_", "w_ext"}) {
        std::vector<Var> out;
        bool ok = true;
        for (std::size_t j = 1; j <= s.m(); ++j) {
            std::string name = prefix + std::to_string(j);
            if (taken.count(name)) {
                ok = false;
                break;
            }
            out.emplace_back(name, 0);
        }
        if (ok) return out;
    }
    throw SchemaError("could not find collision-free extension output names");
}

ExprMatrix stack_rows(const ExprMatrix& top, const std::vector<std::vector<RationalExpr>>& extra) {
    ExprMatrix out(top.rows + extra.size(), top.cols);
    for (std::size_t i = 0; i < top.rows; ++i)
        for (std::size_t j = 0; j < top.cols; ++j) out.at(i, j) = top.at(i, j);
    for (std::size_t i = 0; i < extra.size(); ++i)
        for (std::size_t j = 0; j < top.cols; ++j) out.at(top.rows + i, j) = extra[i][j];
    return out;
}

} // namespace

SystemModel load_system(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("system file must be a JSON object");

    SystemModel s;
    s.name = j.value("name", std::string("system"));
    auto state_names = string_list(j, "states");
    auto input_names = string_list(j, "inputs");
    check_identifiers(state_names, "state");
    check_identifiers(input_names, "input");
    if (state_names.empty()) throw SchemaError("at least one state is required");
    if (input_names.empty()) throw SchemaError("at least one input is required");
    {
        std::set<std::string> all;
        for (const auto& n : state_names)
            if (!all.insert(n).second) throw SchemaError("duplicate variable name '" + n + "'");
        for (const auto& n : input_names)
            if (!all.insert(n).second) throw SchemaError("duplicate variable name '" + n + "'");
    }
    s.states = to_vars(state_names);
    s.inputs = to_vars(input_names);

    std::vector<Var> vocab = s.chart();
    auto f_texts = string_list(j, "f");
    if (f_texts.size() != s.n()) throw SchemaError("'f' must have one expression per state");
    for (const auto& t : f_texts) s.f.push_back(parse_expr(t, vocab));

    if (j.contains("g")) {
        auto g_texts = string_list(j, "g");
        if (g_texts.size() != s.m()) throw SchemaError("'g' must have one expression per input");
        for (const auto& t : g_texts) s.g.push_back(parse_expr(t, vocab));
    }

    if (j.contains("inverse")) {
        if (!s.has_extension()) throw SchemaError("'inverse' requires 'g'");
        const auto& ji = j.at("inverse");
        auto xplus_names = string_list(ji, "xplus");
        auto zeta_names = string_list(ji, "zeta");
        check_identifiers(xplus_names, "xplus");
        check_identifiers(zeta_names, "zeta");
        if (xplus_names.size() != s.n()) throw SchemaError("'inverse.xplus' must name one variable per state");
        if (zeta_names.size() != s.m()) throw SchemaError("'inverse.zeta' must name one variable per input");
        {
            std::set<std::string> all(state_names.begin(), state_names.end());
            all.insert(input_names.begin(), input_names.end());
            std::set<std::string> inv_names;
            for (const auto& n : xplus_names)
                if (!inv_names.insert(n).second) throw SchemaError("duplicate inverse name '" + n + "'");
            for (const auto& n : zeta_names) {
                if (!inv_names.insert(n).second) throw SchemaError("duplicate inverse name '" + n + "'");
                if (all.count(n)) throw SchemaError("zeta name '" + n + "' collides with a system variable");
            }
        }

        std::vector<Var> inv_vocab = to_vars(xplus_names);
        auto zeta_vars = to_vars(zeta_names);
        inv_vocab.insert(inv_vocab.end(), zeta_vars.begin(), zeta_vars.end());

        // internally, x+ is the state variable at shift +1
        std::map<Var, RationalExpr> rename;
        InverseMap inv;
        for (std::size_t i = 0; i < s.n(); ++i) {
            inv.xplus.emplace_back(s.states[i].name, 1);
            rename.emplace(Var(xplus_names[i], 0), RationalExpr::variable(inv.xplus.back()));
        }
        inv.zeta = zeta_vars;
        s.zeta = zeta_vars;

        auto psi_x_texts = string_list(ji, "psi_x");
        auto psi_u_texts = string_list(ji, "psi_u");
        if (psi_x_texts.size() != s.n()) throw SchemaError("'inverse.psi_x' must have one expression per state");
        if (psi_u_texts.size() != s.m()) throw SchemaError("'inverse.psi_u' must have one expression per input");
        for (const auto& t : psi_x_texts) inv.psi_x.push_back(substitute(parse_expr(t, inv_vocab), rename));
        for (const auto& t : psi_u_texts) inv.psi_u.push_back(substitute(parse_expr(t, inv_vocab), rename));
        s.inverse = std::move(inv);
    } else if (s.has_extension()) {
        s.zeta = default_zeta_names(s);
    }

    validate_system(s);
    return s;
}

SystemModel load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_system(buf.str());
}

void validate_system(const SystemModel& s) {
    if (s.states.empty() || s.inputs.empty()) throw ValidationError("system needs states and inputs");
    if (s.f.size() != s.n()) throw ValidationError("f must have one expression per state");

    ExprMatrix ju = jacobian(s.f, s.inputs);
    std::size_t ru = generic_rank(ju);
    if (ru != s.m())
        throw ValidationError("input rank violated: rank(d_u f) = " + std::to_string(ru) +
                              ", expected m = " + std::to_string(s.m()));

    ExprMatrix jxu = jacobian(s.f, s.chart());
    std::size_t rxu = generic_rank(jxu);
    if (rxu != s.n())
        throw ValidationError("submersivity violated: rank(d_(x,u) f) = " + std::to_string(rxu) +
                              ", expected n = " + std::to_string(s.n()));

    if (s.has_extension()) {
        if (s.g.size() != s.m() || s.zeta.size() != s.m())
            throw ValidationError("g and zeta must have one entry per input");
        std::vector<RationalExpr> ext = s.f;
        ext.insert(ext.end(), s.g.begin(), s.g.end());
        std::size_t re = generic_rank(jacobian(ext, s.chart()));
        if (re != s.n() + s.m())
            throw ValidationError("extension not regular: rank(d_(x,u) (f,g)) = " + std::to_string(re) +
                                  ", expected n+m = " + std::to_string(s.n() + s.m()));
    }

    if (s.inverse) {
        const auto& inv = *s.inverse;
        if (!s.has_extension()) throw ValidationError("an inverse requires an extension g");
        if (inv.psi_x.size() != s.n() || inv.psi_u.size() != s.m() || inv.xplus.size() != s.n() ||
            inv.zeta.size() != s.m())
            throw ValidationError("inverse map has inconsistent sizes");

        // psi(f, g) must be the identity on (x, u)
        std::map<Var, RationalExpr> fwd;
        for (std::size_t i = 0; i < s.n(); ++i) fwd.emplace(inv.xplus[i], s.f[i]);
        for (std::size_t j = 0; j < s.m(); ++j) fwd.emplace(inv.zeta[j], s.g[j]);
        for (std::size_t i = 0; i < s.n(); ++i)
            if (substitute(inv.psi_x[i], fwd) != RationalExpr::variable(s.states[i]))
                throw ValidationError("inverse verification failed: psi_x(f,g) != x for state " +
                                      s.states[i].name);
        for (std::size_t j = 0; j < s.m(); ++j)
            if (substitute(inv.psi_u[j], fwd) != RationalExpr::variable(s.inputs[j]))
                throw ValidationError("inverse verification failed: psi_u(f,g) != u for input " +
                                      s.inputs[j].name);

        // (f, g)(psi) must be the identity on (x+, zeta)
        std::map<Var, RationalExpr> bwd;
        for (std::size_t i = 0; i < s.n(); ++i) bwd.emplace(s.states[i], inv.psi_x[i]);
        for (std::size_t j = 0; j < s.m(); ++j) bwd.emplace(s.inputs[j], inv.psi_u[j]);
        for (std::size_t i = 0; i < s.n(); ++i)
            if (substitute(s.f[i], bwd) != RationalExpr::variable(inv.xplus[i]))
                throw ValidationError("inverse verification failed: f(psi) != x+ for state " +
                                      s.states[i].name);
        for (std::size_t j = 0; j < s.m(); ++j)
            if (substitute(s.g[j], bwd) != RationalExpr::variable(inv.zeta[j]))
                throw ValidationError("inverse verification failed: g(psi) != zeta for input " +
                                      s.inputs[j].name);
    }
}

std::vector<RationalExpr> choose_extension(const SystemModel& s, std::uint64_t seed) {
    ExprMatrix base = jacobian(s.f, s.chart());
    std::vector<Var> chart = s.chart();
    std::vector<std::vector<RationalExpr>> chosen_rows;
    std::vector<RationalExpr> chosen;

    auto rank_with = [&](const std::vector<RationalExpr>& row) {
        auto rows = chosen_rows;
        rows.push_back(row);
        return generic_rank(stack_rows(base, rows));
    };

    for (std::size_t idx = 0; idx < chart.size() && chosen.size() < s.m(); ++idx) {
        std::vector<RationalExpr> row(chart.size());
        row[idx] = RationalExpr::from_int(1);
        if (rank_with(row) == s.n() + chosen.size() + 1) {
            chosen_rows.push_back(row);
            chosen.push_back(RationalExpr::variable(chart[idx]));
        }
    }

    // random rational combinations of the coordinates as a fallback
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> coeff(-3, 3);
    for (int attempt = 0; attempt < 64 && chosen.size() < s.m(); ++attempt) {
        std::vector<RationalExpr> row(chart.size());
        RationalExpr expr;
        for (std::size_t idx = 0; idx < chart.size(); ++idx) {
            int c = coeff(rng);
            if (c == 0) continue;
            row[idx] = RationalExpr::from_int(c);
            expr = expr + RationalExpr::from_int(c) * RationalExpr::variable(chart[idx]);
        }
        if (rank_with(row) == s.n() + chosen.size() + 1) {
            chosen_rows.push_back(row);
            chosen.push_back(expr);
        }
    }
    if (chosen.size() != s.m())
        throw ValidationError("could not choose an extension g making (f,g) invertible");
    return chosen;
}

InverseMap invert_extended_map(const SystemModel& s) {
    if (!s.has_extension()) throw InternalError("invert_extended_map requires an extension g");

    InverseMap inv;
    for (const auto& st : s.states) inv.xplus.emplace_back(st.name, 1);
    inv.zeta = s.zeta;

    std::vector<std::pair<std::string, RationalExpr>> equations;
    for (std::size_t i = 0; i < s.n(); ++i)
        equations.emplace_back("x+:" + s.states[i].name,
                               s.f[i] - RationalExpr::variable(inv.xplus[i]));
    for (std::size_t j = 0; j < s.m(); ++j)
        equations.emplace_back("zeta:" + s.zeta[j].name,
                               s.g[j] - RationalExpr::variable(inv.zeta[j]));

    std::vector<Var> unknowns = s.chart();
    Elimination elim = eliminate_triangular(std::move(equations), unknowns);
    if (elim.contradiction)
        throw InversionError("extended map not invertible by elimination: inconsistent equation " +
                             elim.contradiction->first);
    if (!elim.solved_all(unknowns))
        throw InversionError("extended map not invertible by elimination: stuck on nonlinear coupling");

    for (const auto& st : s.states) inv.psi_x.push_back(elim.solutions.at(st));
    for (const auto& in : s.inputs) inv.psi_u.push_back(elim.solutions.at(in));

    SystemModel check = s;
    check.inverse = inv;
    try {
        validate_system(check);
    } catch (const ValidationError& e) {
        throw InternalError(std::string("derived inverse failed verification: ") + e.what());
    }
    return inv;
}

SystemModel ensure_inverse(const SystemModel& s, std::uint64_t seed) {
    SystemModel out = s;
    if (!out.has_extension()) {
        out.g = choose_extension(out, seed);
        out.zeta = default_zeta_names(out);
    }
    if (!out.inverse) out.inverse = invert_extended_map(out);
    validate_system(out);
    return out;
}

SystemModel build_associated(const SystemModel& s) {
    if (!s.inverse) throw InternalError("build_associated requires the inverse map");
    const auto& inv = *s.inverse;

    SystemModel a;
    a.name = s.name + "_associated";
    for (std::size_t i = 1; i <= s.n(); ++i) a.states.emplace_back("z" + std::to_string(i), 0);
    for (std::size_t j = 1; j <= s.m(); ++j) a.inputs.emplace_back("v" + std::to_string(j), 0);
    for (std::size_t j = 1; j <= s.m(); ++j) a.zeta.emplace_back("eta" + std::to_string(j), 0);

    // z+ = psi_x(z, v), eta = psi_u(z, v)
    std::map<Var, RationalExpr> into_zv;
    for (std::size_t i = 0; i < s.n(); ++i) into_zv.emplace(inv.xplus[i], RationalExpr::variable(a.states[i]));
    for (std::size_t j = 0; j < s.m(); ++j) into_zv.emplace(inv.zeta[j], RationalExpr::variable(a.inputs[j]));
    for (const auto& e : inv.psi_x) a.f.push_back(substitute(e, into_zv));
    for (const auto& e : inv.psi_u) a.g.push_back(substitute(e, into_zv));

    // the inverse of (psi_x, psi_u) is (f, g), renamed
    InverseMap ainv;
    std::map<Var, RationalExpr> into_plus_eta;
    for (std::size_t i = 0; i < s.n(); ++i) {
        ainv.xplus.emplace_back(a.states[i].name, 1);
        into_plus_eta.emplace(s.states[i], RationalExpr::variable(ainv.xplus.back()));
    }
    ainv.zeta = a.zeta;
    for (std::size_t j = 0; j < s.m(); ++j)
        into_plus_eta.emplace(s.inputs[j], RationalExpr::variable(a.zeta[j]));
    for (const auto& e : s.f) ainv.psi_x.push_back(substitute(e, into_plus_eta));
    for (const auto& e : s.g) ainv.psi_u.push_back(substitute(e, into_plus_eta));
    a.inverse = std::move(ainv);

    try {
        validate_system(a);
    } catch (const ValidationError& e) {
        throw InternalError(std::string("associated system failed validation: ") + e.what());
    }
    return a;
}

nlohmann::json system_to_json(const SystemModel& s) {
    nlohmann::json j;
    j["name"] = s.name;
    auto names = [](const std::vector<Var>& vs) {
        std::vector<std::string> out;
        for (const auto& v : vs) out.push_back(v.name);
        return out;
    };
    j["states"] = names(s.states);
    j["inputs"] = names(s.inputs);
    std::vector<std::string> f_texts;
    for (const auto& e : s.f) f_texts.push_back(to_string(e));
    j["f"] = f_texts;
    if (s.has_extension()) {
        std::vector<std::string> g_texts;
        for (const auto& e : s.g) g_texts.push_back(to_string(e));
        j["g"] = g_texts;
    }
    if (s.inverse) {
        const auto& inv = *s.inverse;
        std::set<std::string> taken;
        for (const auto& v : s.states) taken.insert(v.name);
        for (const auto& v : s.inputs) taken.insert(v.name);
        for (const auto& v : s.zeta) taken.insert(v.name);
        std::string suffix = "p";
        for (const char* cand : {"p", "_plus", "_next"}) {
            bool ok = true;
            for (const auto& st : s.states)
                if (taken.count(st.name + cand)) ok = false;
            if (ok) {
                suffix = cand;
                break;
            }
        }
        nlohmann::json ji;
        std::vector<std::string> xplus_names;
        std::map<Var, RationalExpr> rename;
        for (std::size_t i = 0; i < s.n(); ++i) {
            xplus_names.push_back(s.states[i].name + suffix);
            rename.emplace(inv.xplus[i], RationalExpr::variable(Var(xplus_names.back(), 0)));
        }
        ji["xplus"] = xplus_names;
        ji["zeta"] = names(inv.zeta);
        std::vector<std::string> px, pu;
        for (const auto& e : inv.psi_x) px.push_back(to_string(substitute(e, rename)));
        for (const auto& e : inv.psi_u) pu.push_back(to_string(substitute(e, rename)));
        ji["psi_x"] = px;
        ji["psi_u"] = pu;
        j["inverse"] = ji;
    }
    return j;
}

} // namespace flatness
