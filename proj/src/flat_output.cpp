#include "flatness/flat_output.hpp"

#include "flatness/elimination.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace flatness {

namespace {

enum class Kind { state, input, zeta, other };

struct VarInfo {
    Kind kind;
    std::size_t index;
};

VarInfo classify(const SystemModel& s, const Var& v) {
    for (std::size_t i = 0; i < s.states.size(); ++i)
        if (s.states[i].name == v.name) return {Kind::state, i};
    for (std::size_t j = 0; j < s.inputs.size(); ++j)
        if (s.inputs[j].name == v.name) return {Kind::input, j};
    for (std::size_t j = 0; j < s.zeta.size(); ++j)
        if (s.zeta[j].name == v.name) return {Kind::zeta, j};
    return {Kind::other, 0};
}

RationalExpr shift_once_forward(const RationalExpr& e, const SystemModel& s) {
    std::map<Var, RationalExpr> map;
    for (const auto& v : e.vars()) {
        VarInfo info = classify(s, v);
        switch (info.kind) {
        case Kind::state:
            if (v.shift != 0) throw MathError("state variable at nonzero shift: " + to_string(v));
            map.emplace(v, s.f[info.index]);
            break;
        case Kind::input:
            if (v.shift < 0) throw MathError("input variable at negative shift: " + to_string(v));
            map.emplace(v, RationalExpr::variable(Var(v.name, v.shift + 1)));
            break;
        case Kind::zeta:
            if (v.shift > -1) throw MathError("extension output at nonnegative shift: " + to_string(v));
            if (v.shift + 1 == 0) {
                if (!s.has_extension()) throw MathError("forward shift requires the extension g");
                map.emplace(v, s.g[info.index]);
            } else {
                map.emplace(v, RationalExpr::variable(Var(v.name, v.shift + 1)));
            }
            break;
        case Kind::other:
            map.emplace(v, RationalExpr::variable(Var(v.name, v.shift + 1)));
            break;
        }
    }
    return substitute(e, map);
}

RationalExpr shift_once_backward(const RationalExpr& e, const SystemModel& s) {
    bool needs_inverse = false;
    for (const auto& v : e.vars()) {
        VarInfo info = classify(s, v);
        if ((info.kind == Kind::state && v.shift == 0) || (info.kind == Kind::input && v.shift == 0))
            needs_inverse = true;
    }
    std::map<Var, RationalExpr> psi_back; // psi with x+ at shift 0 and zeta at shift -1
    std::vector<RationalExpr> psi_x_b, psi_u_b;
    if (needs_inverse) {
        if (!s.inverse) throw MathError("backward shift requires the inverse map");
        const auto& inv = *s.inverse;
        std::map<Var, RationalExpr> lower;
        for (std::size_t i = 0; i < s.n(); ++i)
            lower.emplace(inv.xplus[i], RationalExpr::variable(s.states[i]));
        for (std::size_t j = 0; j < s.m(); ++j)
            lower.emplace(inv.zeta[j], RationalExpr::variable(Var(inv.zeta[j].name, -1)));
        for (const auto& p : inv.psi_x) psi_x_b.push_back(substitute(p, lower));
        for (const auto& p : inv.psi_u) psi_u_b.push_back(substitute(p, lower));
    }

    std::map<Var, RationalExpr> map;
    for (const auto& v : e.vars()) {
        VarInfo info = classify(s, v);
        switch (info.kind) {
        case Kind::state:
            if (v.shift != 0) throw MathError("state variable at nonzero shift: " + to_string(v));
            map.emplace(v, psi_x_b[info.index]);
            break;
        case Kind::input:
            if (v.shift == 0)
                map.emplace(v, psi_u_b[info.index]);
            else if (v.shift > 0)
                map.emplace(v, RationalExpr::variable(Var(v.name, v.shift - 1)));
            else
                throw MathError("input variable at negative shift: " + to_string(v));
            break;
        case Kind::zeta:
            if (v.shift > -1) throw MathError("extension output at nonnegative shift: " + to_string(v));
            map.emplace(v, RationalExpr::variable(Var(v.name, v.shift - 1)));
            break;
        case Kind::other:
            map.emplace(v, RationalExpr::variable(Var(v.name, v.shift - 1)));
            break;
        }
    }
    return substitute(e, map);
}

RationalExpr shift_free(const RationalExpr& e, int k) {
    std::map<Var, RationalExpr> map;
    for (const auto& v : e.vars()) map.emplace(v, RationalExpr::variable(Var(v.name, v.shift + k)));
    return substitute(e, map);
}

} // namespace

RationalExpr shift_expr(const RationalExpr& e, int k, const SystemModel& s) {
    RationalExpr out = e;
    for (; k > 0; --k) out = shift_once_forward(out, s);
    for (; k < 0; ++k) out = shift_once_backward(out, s);
    return out;
}

namespace {

void enumerate_monomials(const std::vector<Var>& vars, int max_degree, std::size_t idx, int used,
                         std::vector<int>& exps, std::vector<Monomial>& out) {
    if (idx == vars.size()) {
        Monomial m;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (exps[i] > 0) m.factors.emplace_back(vars[i], exps[i]);
        std::sort(m.factors.begin(), m.factors.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (!m.is_one()) out.push_back(std::move(m));
        return;
    }
    for (int e = 0; e + used <= max_degree; ++e) {
        exps[idx] = e;
        enumerate_monomials(vars, max_degree, idx + 1, used + e, exps, out);
    }
    exps[idx] = 0;
}

Polynomial poly_lcm(const Polynomial& a, const Polynomial& b) {
    return exact_div(a * b, poly_gcd(a, b)).primitive_signed();
}

} // namespace

std::vector<RationalExpr> first_integrals(const Distribution& d, const std::vector<Var>& candidate_vars,
                                          int max_degree) {
    std::vector<Monomial> ansatz;
    std::vector<int> exps(candidate_vars.size(), 0);
    enumerate_monomials(candidate_vars, max_degree, 0, 0, exps, ansatz);

    // stack, per basis field, the coefficient rows of v(phi) = 0 collected by
    // chart monomial; the unknowns are the rational ansatz coefficients
    std::vector<std::vector<Rational>> rows;
    for (const auto& field : d.basis) {
        std::vector<RationalExpr> images;
        Polynomial common(Rational(1));
        for (const auto& m : ansatz) {
            Polynomial pm = Polynomial::from_terms({{m, Rational(1)}});
            RationalExpr img;
            for (std::size_t i = 0; i < field.chart.size(); ++i) {
                if (field.coeffs[i].is_zero()) continue;
                Polynomial dm = pm.diff(field.chart[i]);
                if (dm.is_zero()) continue;
                img = img + field.coeffs[i] * RationalExpr::from_poly(dm);
            }
            images.push_back(img);
            if (!img.is_zero()) common = poly_lcm(common, img.den());
        }
        std::map<Monomial, std::vector<Rational>, MonoGreater> collected;
        for (std::size_t a = 0; a < ansatz.size(); ++a) {
            if (images[a].is_zero()) continue;
            Polynomial numer = images[a].num() * exact_div(common, images[a].den());
            for (const auto& [mono, coeff] : numer.terms()) {
                auto [it, fresh] = collected.emplace(mono, std::vector<Rational>(ansatz.size()));
                it->second[a] += coeff;
            }
        }
        for (auto& [mono, row] : collected) rows.push_back(std::move(row));
    }

    ExprMatrix mat(rows.size(), ansatz.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < ansatz.size(); ++c)
            if (rows[r][c] != 0) mat.at(r, c) = RationalExpr::constant(rows[r][c]);
    LinearSolution sol = solve_linear(mat, ExprMatrix(rows.size(), 1));

    std::vector<RationalExpr> out;
    for (const auto& vec : sol.nullspace) {
        Polynomial::TermMap terms;
        for (std::size_t a = 0; a < ansatz.size(); ++a) {
            auto c = vec[a].as_constant();
            if (!c) throw InternalError("first_integrals: non-constant solution coefficient");
            if (*c != 0) terms.emplace(ansatz[a], *c);
        }
        Polynomial phi = Polynomial::from_terms(std::move(terms)).primitive_signed();
        if (!phi.is_zero()) out.push_back(RationalExpr::from_poly(phi));
    }
    std::sort(out.begin(), out.end(), [](const RationalExpr& a, const RationalExpr& b) {
        int da = a.num().total_degree(), db = b.num().total_degree();
        if (da != db) return da < db;
        return cmp_monomial(a.num().leading_monomial(), b.num().leading_monomial()) > 0;
    });
    return out;
}

std::vector<std::string> default_output_names(const SystemModel& s) {
    std::set<std::string> taken;
    for (const auto& v : s.states) taken.insert(v.name);
    for (const auto& v : s.inputs) taken.insert(v.name);
    for (const auto& v : s.zeta) taken.insert(v.name);
    for (const char* prefix : {"y", "y_", "out"}) {
        std::vector<std::string> out;
        bool ok = true;
        for (std::size_t j = 1; j <= s.m(); ++j) {
            std::string name = prefix + std::to_string(j);
            if (taken.count(name)) {
                ok = false;
                break;
            }
            out.push_back(name);
        }
        if (ok) return out;
    }
    throw SchemaError("could not find collision-free output names");
}

VerifyResult verify_flat_output(const SystemModel& s, const FlatOutputCandidate& cand, int max_back,
                                int max_fwd) {
    VerifyResult out;
    if (cand.components.size() != s.m()) throw Error("candidate must have one component per input");
    if (!s.has_extension()) throw Error("verify_flat_output requires an extension g");
    if (max_back > 0 && !s.inverse) throw Error("backward window requires the inverse map");
    if (max_back < 0 || max_fwd < 0) throw Error("shift windows must be nonnegative");

    const auto& names = cand.output_names;
    std::set<std::string> y_names(names.begin(), names.end());

    // shift equations y_j@t = delta^t(phi_j), nearest offsets first
    std::vector<int> offsets{0};
    for (int t = 1; t <= std::max(max_back, max_fwd); ++t) {
        if (t <= max_back) offsets.push_back(-t);
        if (t <= max_fwd) offsets.push_back(t);
    }
    std::vector<std::map<int, RationalExpr>> shifted(s.m());
    for (std::size_t j = 0; j < s.m(); ++j) shifted[j][0] = cand.components[j];
    std::vector<std::pair<std::string, RationalExpr>> equations;
    for (int t : offsets) {
        for (std::size_t j = 0; j < s.m(); ++j) {
            if (!shifted[j].count(t)) {
                const RationalExpr& prev = shifted[j].at(t > 0 ? t - 1 : t + 1);
                shifted[j][t] = shift_expr(prev, t > 0 ? 1 : -1, s);
            }
            equations.emplace_back(names[j] + "@" + std::to_string(t),
                                   RationalExpr::variable(Var(names[j], t)) - shifted[j][t]);
        }
    }

    // unknowns: states, then current inputs, then shifted inputs, then
    // backward extension outputs, then anything else
    std::set<Var> seen;
    for (const auto& [label, e] : equations)
        for (const auto& v : e.vars())
            if (!y_names.count(v.name)) seen.insert(v);
    std::vector<Var> unknowns;
    std::vector<Var> later;
    for (const auto& st : s.states)
        if (seen.count(st)) unknowns.push_back(st);
    for (const auto& in : s.inputs)
        if (seen.count(in)) unknowns.push_back(in);
    for (const auto& v : seen) {
        VarInfo info = classify(s, v);
        bool core = (info.kind == Kind::state || info.kind == Kind::input) && v.shift == 0;
        if (!core) later.push_back(v);
    }
    std::sort(later.begin(), later.end(), [&](const Var& a, const Var& b) {
        auto key = [&](const Var& v) {
            VarInfo info = classify(s, v);
            int group = info.kind == Kind::input ? 0 : info.kind == Kind::zeta ? 1 : 2;
            return std::tuple<int, int, std::size_t, std::string>(group, std::abs(v.shift), info.index,
                                                                  v.name);
        };
        return key(a) < key(b);
    });
    unknowns.insert(unknowns.end(), later.begin(), later.end());

    Elimination elim = eliminate_triangular(std::move(equations), unknowns);
    if (elim.contradiction) {
        out.status = VerifyStatus::refuted;
        out.residuals.push_back(*elim.contradiction);
        out.message = "the candidate components satisfy the forced relation 0 = " +
                      to_string(elim.contradiction->second) + " (from " + elim.contradiction->first +
                      "); not a flat output";
        return out;
    }

    std::vector<std::string> missing;
    auto solved_pure = [&](const Var& v) -> const RationalExpr* {
        auto it = elim.solutions.find(v);
        if (it == elim.solutions.end()) return nullptr;
        for (const auto& w : it->second.vars())
            if (!y_names.count(w.name)) return nullptr;
        return &it->second;
    };
    Parameterization p;
    p.output_names = names;
    for (const auto& st : s.states) {
        const RationalExpr* e = solved_pure(st);
        if (e)
            p.f_x.push_back(*e);
        else
            missing.push_back(st.name);
    }
    for (const auto& in : s.inputs) {
        const RationalExpr* e = solved_pure(in);
        if (e)
            p.f_u.push_back(*e);
        else
            missing.push_back(in.name);
    }
    if (!missing.empty()) {
        out.status = VerifyStatus::inconclusive;
        out.residuals = elim.residuals;
        std::string list;
        for (const auto& v : missing) list += (list.empty() ? "" : ", ") + v;
        out.message = "elimination could not express " + list + " within the shift window";
        return out;
    }

    std::map<Var, RationalExpr> by_param;
    for (std::size_t i = 0; i < s.n(); ++i) by_param.emplace(s.states[i], p.f_x[i]);
    for (std::size_t j = 0; j < s.m(); ++j) by_param.emplace(s.inputs[j], p.f_u[j]);
    for (const auto& gj : s.g) p.f_g.push_back(substitute(gj, by_param));

    // componentwise minimal windows actually used
    p.r1.assign(s.m(), 0);
    p.r2.assign(s.m(), 0);
    auto scan = [&](const RationalExpr& e, bool in_fx) {
        for (const auto& v : e.vars()) {
            auto it = std::find(names.begin(), names.end(), v.name);
            if (it == names.end()) throw InternalError("parameterization references a non-output variable");
            std::size_t j = static_cast<std::size_t>(it - names.begin());
            p.r1[j] = std::max(p.r1[j], -v.shift);
            p.r2[j] = std::max(p.r2[j], in_fx ? v.shift + 1 : v.shift);
        }
    };
    for (const auto& e : p.f_x) scan(e, true);
    for (const auto& e : p.f_u) scan(e, false);

    // round-trip identity: substituting the shifted candidate back into the
    // parameterization returns the coordinate functions
    std::map<Var, RationalExpr> back;
    for (std::size_t j = 0; j < s.m(); ++j)
        for (const auto& [t, e] : shifted[j]) back.emplace(Var(names[j], t), e);
    for (std::size_t i = 0; i < s.n(); ++i)
        if (substitute(p.f_x[i], back) != RationalExpr::variable(s.states[i]))
            throw InternalError("round-trip identity failed for state " + s.states[i].name);
    for (std::size_t j = 0; j < s.m(); ++j)
        if (substitute(p.f_u[j], back) != RationalExpr::variable(s.inputs[j]))
            throw InternalError("round-trip identity failed for input " + s.inputs[j].name);

    // dynamics consistency: delta(F_x) = f(F_x, F_u)
    for (std::size_t i = 0; i < s.n(); ++i)
        if (shift_free(p.f_x[i], 1) != substitute(s.f[i], by_param))
            throw InternalError("dynamics identity failed for state " + s.states[i].name);

    out.status = VerifyStatus::certified;
    out.parameterization = std::move(p);
    return out;
}

DeriveResult derive_forward_flat_output(const SystemModel& s, const SequenceRecord& rec, int max_degree) {
    DeriveResult out;
    if (!rec.forward_flat) {
        out.message = "system is not forward-flat";
        return out;
    }

    // candidate pool: polynomial first integrals of the state parts of the
    // E_k sequence, deepest step first
    std::vector<RationalExpr> pool;
    auto add_unique = [&](const RationalExpr& e) {
        for (const auto& p : pool)
            if (p == e) return;
        pool.push_back(e);
    };
    for (std::size_t k = rec.steps.size() - 1; k-- > 0;) {
        const Distribution& e = rec.steps[k].E;
        std::vector<std::vector<RationalExpr>> rows;
        for (const auto& field : e.basis) {
            bool state_only = true;
            for (std::size_t j = 0; j < s.m(); ++j)
                if (!field.coeffs[s.n() + j].is_zero()) state_only = false;
            if (state_only) rows.push_back(field.coeffs);
        }
        Distribution state_part = make_distribution(e.chart, std::move(rows));
        for (const auto& phi : first_integrals(state_part, s.states, max_degree)) add_unique(phi);
    }
    if (pool.size() < s.m()) {
        out.message = "not enough first integrals within the degree bound";
        return out;
    }

    std::vector<std::string> names = default_output_names(s);
    const std::size_t m = s.m();
    std::vector<std::size_t> idx(m);
    for (std::size_t j = 0; j < m; ++j) idx[j] = j;

    int verify_budget = 64;
    long guard = 200000;
    while (guard-- > 0) {
        std::vector<RationalExpr> comps;
        for (std::size_t j = 0; j < m; ++j) comps.push_back(pool[idx[j]]);
        if (generic_rank(jacobian(comps, s.states)) == m) {
            FlatOutputCandidate cand;
            cand.output_names = names;
            cand.components = comps;
            cand.q1.assign(m, 0);
            cand.q2.assign(m, 0);
            VerifyResult vr = verify_flat_output(s, cand, 0, static_cast<int>(s.n()));
            if (vr.status == VerifyStatus::certified) {
                out.ok = true;
                out.candidate = std::move(cand);
                return out;
            }
            if (--verify_budget <= 0) break;
        }
        // next combination of pool indices
        std::size_t j = m;
        while (j-- > 0) {
            if (idx[j] + (m - j) < pool.size()) {
                ++idx[j];
                for (std::size_t t = j + 1; t < m; ++t) idx[t] = idx[t - 1] + 1;
                break;
            }
            if (j == 0) {
                guard = 0;
                break;
            }
        }
        if (m == 0) break;
    }
    out.message = "no certified output found within the degree bound";
    return out;
}

FlatOutputCandidate make_candidate(const SystemModel& s, const std::vector<std::string>& texts) {
    if (texts.size() != s.m()) throw SchemaError("candidate must have one output per input");
    std::set<std::string> allowed;
    for (const auto& v : s.states) allowed.insert(v.name);
    for (const auto& v : s.inputs) allowed.insert(v.name);
    for (const auto& v : s.zeta) allowed.insert(v.name);

    FlatOutputCandidate cand;
    cand.output_names = default_output_names(s);
    cand.q1.assign(s.m(), 0);
    cand.q2.assign(s.m(), 0);
    for (std::size_t j = 0; j < texts.size(); ++j) {
        RationalExpr e = parse_expr_names(texts[j], allowed);
        for (const auto& v : e.vars()) {
            VarInfo info = classify(s, v);
            if (info.kind == Kind::state && v.shift != 0)
                throw SchemaError("state '" + v.name + "' may only appear at shift 0 in a flat output");
            if (info.kind == Kind::input && v.shift < 0)
                throw SchemaError("input '" + v.name + "' may not appear at negative shifts");
            if (info.kind == Kind::zeta && v.shift >= 0)
                throw SchemaError("extension output '" + v.name + "' may only appear at negative shifts");
            if (info.kind == Kind::input) cand.q2[j] = std::max(cand.q2[j], v.shift);
            if (info.kind == Kind::zeta) cand.q1[j] = std::max(cand.q1[j], -v.shift);
        }
        cand.components.push_back(std::move(e));
    }
    return cand;
}

FlatOutputCandidate load_candidate(const SystemModel& s, const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("outputs") || !j.at("outputs").is_array())
        throw SchemaError("candidate file needs an 'outputs' array");
    std::vector<std::string> texts;
    for (const auto& e : j.at("outputs")) {
        if (!e.is_string()) throw SchemaError("'outputs' must contain strings");
        texts.push_back(e.get<std::string>());
    }
    if (j.contains("vars") && j.at("vars").contains("zeta")) {
        std::vector<std::string> zeta_names;
        for (const auto& e : j.at("vars").at("zeta")) zeta_names.push_back(e.get<std::string>());
        if (zeta_names.size() != s.m()) throw SchemaError("'vars.zeta' must name one variable per input");
        if (!s.has_extension()) throw SchemaError("candidate names zeta but the system has no extension");
        for (std::size_t k = 0; k < zeta_names.size(); ++k) {
            for (const auto& v : s.states)
                if (v.name == zeta_names[k])
                    throw SchemaError("zeta name '" + zeta_names[k] + "' shadows a state");
            for (const auto& v : s.inputs)
                if (v.name == zeta_names[k])
                    throw SchemaError("zeta name '" + zeta_names[k] + "' shadows an input");
        }
        // rewrite the declared zeta names to the system's extension outputs
        for (auto& t : texts)
            for (std::size_t k = 0; k < zeta_names.size(); ++k) {
                std::string from = zeta_names[k], to = s.zeta[k].name;
                if (from == to) continue;
                std::string rebuilt;
                std::size_t pos = 0;
                while (pos < t.size()) {
                    if (std::isalpha(static_cast<unsigned char>(t[pos]))) {
                        std::size_t start = pos;
                        while (pos < t.size() && (std::isalnum(static_cast<unsigned char>(t[pos])) ||
                                                  t[pos] == '_'))
                            ++pos;
                        std::string word = t.substr(start, pos - start);
                        rebuilt += (word == from) ? to : word;
                    } else {
                        rebuilt += t[pos++];
                    }
                }
                t = rebuilt;
            }
    }
    return make_candidate(s, texts);
}

FlatOutputCandidate load_candidate_file(const SystemModel& s, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_candidate(s, buf.str());
}

} // namespace flatness
