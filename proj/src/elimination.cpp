#include "flatness/elimination.hpp"

#include <algorithm>

namespace flatness {

namespace {

struct Pick {
    std::size_t equation;
    Var unknown;
    RationalExpr value;
};

bool coeff_unknown_free(const Polynomial& coeff, const std::vector<Var>& unsolved) {
    std::set<Var> vs;
    coeff.collect_vars(vs);
    for (const auto& u : unsolved)
        if (vs.count(u)) return false;
    return true;
}

/// Finds (equation, unknown) with the numerator linear in the unknown.
/// strict = true additionally requires the coefficient free of unknowns.
std::optional<Pick> find_pick(const std::vector<std::pair<std::string, RationalExpr>>& eqs,
                              const std::vector<Var>& unsolved, bool strict) {
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        const Polynomial& num = eqs[i].second.num();
        for (const auto& u : unsolved) {
            if (num.degree_in(u) != 1) continue;
            auto buckets = num.coeffs_in(u);
            const Polynomial& a = buckets.at(1);
            if (strict && !coeff_unknown_free(a, unsolved)) continue;
            Polynomial b = buckets.count(0) ? buckets.at(0) : Polynomial{};
            RationalExpr value = RationalExpr::fraction(-b, a);
            return Pick{i, u, value};
        }
    }
    return std::nullopt;
}

} // namespace

Elimination eliminate_triangular(std::vector<std::pair<std::string, RationalExpr>> equations,
                                 const std::vector<Var>& unknowns) {
    Elimination out;
    std::vector<Var> unsolved = unknowns;

    auto has_unknown = [&](const RationalExpr& e) {
        auto vs = e.vars();
        for (const auto& u : unsolved)
            if (vs.count(u)) return true;
        return false;
    };

    auto sweep_consistency = [&]() -> bool {
        for (auto it = equations.begin(); it != equations.end();) {
            if (it->second.is_zero()) {
                it = equations.erase(it);
            } else if (!has_unknown(it->second)) {
                out.contradiction = *it;
                return false;
            } else {
                ++it;
            }
        }
        return true;
    };

    if (!sweep_consistency()) return out;
    while (!unsolved.empty() && !equations.empty()) {
        auto pick = find_pick(equations, unsolved, true);
        if (!pick) pick = find_pick(equations, unsolved, false);
        if (!pick) break;

        equations.erase(equations.begin() + static_cast<std::ptrdiff_t>(pick->equation));
        unsolved.erase(std::find(unsolved.begin(), unsolved.end(), pick->unknown));

        std::map<Var, RationalExpr> binding{{pick->unknown, pick->value}};
        for (auto& [label, e] : equations) e = substitute(e, binding);
        for (auto& [v, e] : out.solutions) e = substitute(e, binding);
        out.solutions.emplace(pick->unknown, pick->value);

        if (!sweep_consistency()) return out;
    }
    out.residuals = std::move(equations);
    return out;
}

} // namespace flatness
