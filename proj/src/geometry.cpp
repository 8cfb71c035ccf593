#include "flatness/geometry.hpp"

#include <sstream>

namespace flatness {

std::string to_string(const VectorField& v) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < v.chart.size(); ++i) {
        const RationalExpr& c = v.coeffs[i];
        if (c.is_zero()) continue;
        std::string cs = to_string(c);
        bool negated = false;
        if (c == -RationalExpr::from_int(1)) {
            negated = true;
            cs.clear();
        } else if (c.is_one()) {
            cs.clear();
        } else if (cs.find(' ') != std::string::npos) {
            cs = "(" + cs + ")";
        } else if (cs.front() == '-') {
            negated = true;
            cs.erase(cs.begin());
        }
        if (first) {
            if (negated) out << "-";
        } else {
            out << (negated ? " - " : " + ");
        }
        if (!cs.empty()) out << cs << "*";
        out << "d_" << to_string(v.chart[i]);
        first = false;
    }
    if (first) out << "0";
    return out.str();
}

VectorField unit_field(const std::vector<Var>& chart, std::size_t index) {
    VectorField v{chart, std::vector<RationalExpr>(chart.size())};
    v.coeffs[index] = RationalExpr::from_int(1);
    return v;
}

namespace {

ExprMatrix rows_to_matrix(const std::vector<std::vector<RationalExpr>>& rows, std::size_t cols) {
    ExprMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
    return m;
}

std::vector<std::vector<RationalExpr>> basis_rows(const Distribution& d) {
    std::vector<std::vector<RationalExpr>> rows;
    for (const auto& f : d.basis) rows.push_back(f.coeffs);
    return rows;
}

/// Reduces `vec` against an RREF matrix; the remainder is zero iff `vec`
/// lies in the row span.
std::vector<RationalExpr> reduce_against(const Rref& red, std::vector<RationalExpr> vec) {
    for (std::size_t i = 0; i < red.pivots.size(); ++i) {
        std::size_t p = red.pivots[i];
        if (vec[p].is_zero()) continue;
        RationalExpr factor = vec[p];
        for (std::size_t j = 0; j < red.mat.cols; ++j) vec[j] = vec[j] - factor * red.mat.at(i, j);
    }
    return vec;
}

bool all_zero(const std::vector<RationalExpr>& v) {
    for (const auto& e : v)
        if (!e.is_zero()) return false;
    return true;
}

} // namespace

Distribution make_distribution(std::vector<Var> chart, std::vector<std::vector<RationalExpr>> rows) {
    Rref red = rref(rows_to_matrix(rows, chart.size()));
    Distribution d;
    d.chart = std::move(chart);
    for (std::size_t i = 0; i < red.pivots.size(); ++i) {
        VectorField f;
        f.chart = d.chart;
        f.coeffs.assign(red.mat.entries.begin() + i * red.mat.cols,
                        red.mat.entries.begin() + (i + 1) * red.mat.cols);
        d.basis.push_back(std::move(f));
    }
    return d;
}

bool span_contains(const Distribution& d, const VectorField& v) {
    if (v.chart != d.chart) throw InternalError("span_contains: chart mismatch");
    Rref red = rref(rows_to_matrix(basis_rows(d), d.chart.size()));
    return all_zero(reduce_against(red, v.coeffs));
}

bool span_equal(const Distribution& a, const Distribution& b) {
    if (a.chart != b.chart) return false;
    for (const auto& f : a.basis)
        if (!span_contains(b, f)) return false;
    for (const auto& f : b.basis)
        if (!span_contains(a, f)) return false;
    return true;
}

VectorField lie_bracket(const VectorField& a, const VectorField& b) {
    if (a.chart != b.chart) throw InternalError("lie_bracket: chart mismatch");
    VectorField out{a.chart, std::vector<RationalExpr>(a.chart.size())};
    for (std::size_t i = 0; i < a.chart.size(); ++i) {
        RationalExpr acc;
        for (std::size_t j = 0; j < a.chart.size(); ++j) {
            if (!a.coeffs[j].is_zero()) acc = acc + a.coeffs[j] * diff(b.coeffs[i], a.chart[j]);
            if (!b.coeffs[j].is_zero()) acc = acc - b.coeffs[j] * diff(a.coeffs[i], a.chart[j]);
        }
        out.coeffs[i] = acc;
    }
    return out;
}

Distribution kernel_distribution(const SystemModel& s) {
    ExprMatrix j = jacobian(s.f, s.chart());
    LinearSolution sol = solve_linear(j, ExprMatrix(s.n(), 1));
    return make_distribution(s.chart(), sol.nullspace);
}

namespace {

std::vector<Var> plus_chart(const SystemModel& s) {
    std::vector<Var> out;
    for (const auto& st : s.states) out.emplace_back(st.name, 1);
    return out;
}

std::map<Var, RationalExpr> into_plus_coordinates(const SystemModel& s) {
    const auto& inv = *s.inverse;
    std::map<Var, RationalExpr> map;
    for (std::size_t i = 0; i < s.n(); ++i) map.emplace(s.states[i], inv.psi_x[i]);
    for (std::size_t j = 0; j < s.m(); ++j) map.emplace(s.inputs[j], inv.psi_u[j]);
    return map;
}

} // namespace

Distribution pushforward_distribution(const SystemModel& s, const Distribution& d) {
    if (!s.inverse) throw InternalError("pushforward_distribution requires the inverse map");
    if (d.chart != s.chart()) throw InternalError("pushforward_distribution: distribution not on (x,u)");

    ExprMatrix jac_f = jacobian(s.f, s.chart());
    auto to_plus = into_plus_coordinates(s);

    std::vector<std::vector<RationalExpr>> rows;
    for (const auto& field : d.basis) {
        std::vector<RationalExpr> w(s.n());
        for (std::size_t i = 0; i < s.n(); ++i) {
            RationalExpr acc;
            for (std::size_t j = 0; j < d.chart.size(); ++j)
                if (!field.coeffs[j].is_zero()) acc = acc + jac_f.at(i, j) * field.coeffs[j];
            w[i] = substitute(acc, to_plus);
        }
        rows.push_back(std::move(w));
    }

    Distribution out = make_distribution(plus_chart(s), std::move(rows));
    for (const auto& field : out.basis)
        for (const auto& c : field.coeffs)
            for (const auto& zv : s.zeta)
                if (c.depends_on(zv))
                    throw InternalError("pushforward of a non-projectable distribution: echelon basis "
                                        "depends on extension output " +
                                        zv.name);
    return out;
}

Distribution largest_projectable_subdistribution(const SystemModel& s, const Distribution& e) {
    if (e.chart != s.chart()) throw InternalError("largest_projectable_subdistribution: wrong chart");
    Distribution vertical = kernel_distribution(s);
    Distribution d = make_distribution(e.chart, basis_rows(e));

    while (d.dim() > 0) {
        // condition over the function field: [w, sum_i c_i b_i] in span(D + V)
        // for every vertical basis field w, which reduces to the residuals of
        // [w, b_i] modulo span(D + V) annihilating the coefficient vector c
        auto span_rows = basis_rows(d);
        for (const auto& w : vertical.basis) span_rows.push_back(w.coeffs);
        Rref span_red = rref(rows_to_matrix(span_rows, d.chart.size()));

        std::vector<std::vector<RationalExpr>> residuals; // residuals[i] per basis field, stacked per w
        residuals.resize(d.dim());
        bool any_nonzero = false;
        for (const auto& w : vertical.basis) {
            for (std::size_t i = 0; i < d.dim(); ++i) {
                VectorField br = lie_bracket(w, d.basis[i]);
                auto r = reduce_against(span_red, br.coeffs);
                if (!all_zero(r)) any_nonzero = true;
                residuals[i].insert(residuals[i].end(), r.begin(), r.end());
            }
        }
        if (!any_nonzero) break;

        std::size_t eq_count = residuals[0].size();
        ExprMatrix a(eq_count, d.dim());
        for (std::size_t i = 0; i < d.dim(); ++i)
            for (std::size_t k = 0; k < eq_count; ++k) a.at(k, i) = residuals[i][k];
        LinearSolution sol = solve_linear(a, ExprMatrix(eq_count, 1));

        std::vector<std::vector<RationalExpr>> new_rows;
        for (const auto& c : sol.nullspace) {
            std::vector<RationalExpr> row(d.chart.size());
            for (std::size_t i = 0; i < d.dim(); ++i) {
                if (c[i].is_zero()) continue;
                for (std::size_t j = 0; j < d.chart.size(); ++j)
                    row[j] = row[j] + c[i] * d.basis[i].coeffs[j];
            }
            new_rows.push_back(std::move(row));
        }
        Distribution next = make_distribution(d.chart, std::move(new_rows));
        if (next.dim() == d.dim())
            throw InternalError("projectability iteration failed to shrink despite nonzero residuals");
        d = std::move(next);
    }

    for (const auto& f : d.basis)
        if (!span_contains(e, f))
            throw InternalError("projectable subdistribution escaped the enclosing span");
    if (d.dim() > 0) pushforward_distribution(s, d); // certificate
    return d;
}

Distribution lift_and_extend(const Distribution& delta, const SystemModel& s) {
    std::vector<Var> chart = s.chart();
    std::map<Var, RationalExpr> rename;
    for (const auto& st : s.states) rename.emplace(Var(st.name, 1), RationalExpr::variable(st));

    std::vector<std::vector<RationalExpr>> rows;
    for (const auto& f : delta.basis) {
        std::vector<RationalExpr> row(chart.size());
        for (std::size_t i = 0; i < s.n(); ++i) row[i] = substitute(f.coeffs[i], rename);
        rows.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < s.m(); ++j) {
        std::vector<RationalExpr> row(chart.size());
        row[s.n() + j] = RationalExpr::from_int(1);
        rows.push_back(std::move(row));
    }
    return make_distribution(std::move(chart), std::move(rows));
}

namespace {

bool involutive(const Distribution& d) {
    for (std::size_t i = 0; i < d.dim(); ++i)
        for (std::size_t j = i + 1; j < d.dim(); ++j)
            if (!span_contains(d, lie_bracket(d.basis[i], d.basis[j]))) return false;
    return true;
}

bool nested_in(const Distribution& inner, const Distribution& outer) {
    for (const auto& f : inner.basis)
        if (!span_contains(outer, f)) return false;
    return true;
}

} // namespace

SequenceRecord forward_flatness_test(const SystemModel& s) {
    if (!s.inverse) throw InternalError("forward_flatness_test requires the inverse map");
    const std::size_t full = s.n() + s.m();

    SequenceRecord rec;
    std::vector<std::vector<RationalExpr>> rows;
    for (std::size_t j = 0; j < s.m(); ++j) {
        std::vector<RationalExpr> row(s.n() + s.m());
        row[s.n() + j] = RationalExpr::from_int(1);
        rows.push_back(std::move(row));
    }
    Distribution e = make_distribution(s.chart(), std::move(rows));
    rec.steps.push_back(SequenceStep{e, involutive(e), std::nullopt, std::nullopt});
    rec.dims.push_back(e.dim());

    for (std::size_t k = 1; k <= s.n() + 2; ++k) {
        Distribution d = largest_projectable_subdistribution(s, rec.steps.back().E);
        rec.steps.back().D = d;
        Distribution delta = pushforward_distribution(s, d);
        Distribution next = lift_and_extend(delta, s);

        if (!nested_in(rec.steps.back().E, next))
            throw InternalError("distribution sequence is not nested at step " + std::to_string(k));

        std::size_t prev_dim = rec.dims.back();
        rec.steps.push_back(SequenceStep{next, involutive(next), std::nullopt, std::move(delta)});
        rec.dims.push_back(next.dim());

        if (next.dim() == prev_dim) {
            rec.kbar = k;
            rec.forward_flat = next.dim() == full;
            return rec;
        }
        if (next.dim() < prev_dim)
            throw InternalError("distribution sequence dimension dropped at step " + std::to_string(k));
        if (next.dim() == full) {
            rec.kbar = k + 1;
            rec.forward_flat = true;
            return rec;
        }
    }
    throw InternalError("distribution sequence failed to terminate within n + 2 steps");
}

} // namespace flatness
