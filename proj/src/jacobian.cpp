#include "flatness/jacobian.hpp"

#include <algorithm>

namespace flatness {

std::size_t JacobianLayout::column_of(const Var& v) const {
    for (std::size_t c = 0; c < column_vars.size(); ++c)
        if (column_vars[c] == v) return c;
    throw InternalError("no Jacobian column for " + to_string(v));
}

ExtendedJacobian build_extended_jacobian(const Parameterization& p) {
    ExtendedJacobian out;
    out.n = p.f_x.size();
    out.m = p.f_u.size();

    int max_level = 0;
    for (std::size_t j = 0; j < out.m; ++j) max_level = std::max(max_level, p.r1[j] + p.r2[j]);
    for (int t = 0; t <= max_level; ++t)
        for (std::size_t j = 0; j < out.m; ++j)
            if (t <= p.r1[j] + p.r2[j]) {
                out.layout.column_vars.emplace_back(p.output_names[j], t - p.r1[j]);
                out.layout.column_levels.emplace_back(t, j);
            }

    std::vector<RationalExpr> rows = p.f_x;
    rows.insert(rows.end(), p.f_u.begin(), p.f_u.end());
    rows.insert(rows.end(), p.f_g.begin(), p.f_g.end());
    out.mat = jacobian(rows, out.layout.column_vars);

    // F_x must be independent of the highest forward shifts y_[R2]
    for (std::size_t c = 0; c < out.layout.column_vars.size(); ++c) {
        auto [level, j] = out.layout.column_levels[c];
        if (level != p.r1[j] + p.r2[j]) continue;
        for (std::size_t i = 0; i < out.n; ++i)
            if (!out.mat.at(i, c).is_zero())
                throw InternalError("F_x depends on the highest forward shift " +
                                    to_string(out.layout.column_vars[c]));
    }
    return out;
}

namespace {

ExprMatrix block(const ExtendedJacobian& jac, std::size_t row0, std::size_t nrows,
                 const std::vector<std::size_t>& cols) {
    ExprMatrix out(nrows, cols.size());
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t c = 0; c < cols.size(); ++c) out.at(i, c) = jac.mat.at(row0 + i, cols[c]);
    return out;
}

} // namespace

RankReport check_rank_conditions(const Parameterization& p, RankMode mode) {
    ExtendedJacobian jac = build_extended_jacobian(p);
    const std::size_t n = jac.n, m = jac.m;

    std::vector<std::size_t> deep_cols, high_x_cols, high_u_cols;
    for (std::size_t j = 0; j < m; ++j) {
        deep_cols.push_back(jac.layout.column_of(Var(p.output_names[j], -p.r1[j])));
        if (p.r2[j] - 1 >= -p.r1[j])
            high_x_cols.push_back(jac.layout.column_of(Var(p.output_names[j], p.r2[j] - 1)));
        high_u_cols.push_back(jac.layout.column_of(Var(p.output_names[j], p.r2[j])));
    }

    RankReport rep;
    rep.mode = mode;
    rep.rank_fx_deep = generic_rank(block(jac, 0, n, deep_cols));
    rep.rank_fg_deep = generic_rank(block(jac, n + m, m, deep_cols));
    rep.rank_fx_high = generic_rank(block(jac, 0, n, high_x_cols));
    rep.rank_fu_high = generic_rank(block(jac, n, m, high_u_cols));
    rep.high_ranks_equal = rep.rank_fx_high == rep.rank_fu_high;

    bool r1_zero = std::all_of(p.r1.begin(), p.r1.end(), [](int r) { return r == 0; });
    bool r2_zero = std::all_of(p.r2.begin(), p.r2.end(), [](int r) { return r == 0; });
    rep.forward_pattern = r1_zero && rep.rank_fx_deep == m && rep.rank_fg_deep == m && rep.high_ranks_equal &&
                      rep.rank_fx_high < m;
    rep.backward_pattern = r2_zero && rep.rank_fx_deep == rep.rank_fg_deep && rep.rank_fx_deep < m &&
                       rep.rank_fx_high == m && rep.rank_fu_high == m;
    return rep;
}

} // namespace flatness
