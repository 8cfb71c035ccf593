#include "flatness/matrix.hpp"

namespace flatness {

ExprMatrix ExprMatrix::identity(std::size_t n) {
    ExprMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = RationalExpr::from_int(1);
    return m;
}

ExprMatrix jacobian(const std::vector<RationalExpr>& exprs, const std::vector<Var>& vars) {
    ExprMatrix m(exprs.size(), vars.size());
    for (std::size_t i = 0; i < exprs.size(); ++i)
        for (std::size_t j = 0; j < vars.size(); ++j) m.at(i, j) = diff(exprs[i], vars[j]);
    return m;
}

Rref rref(ExprMatrix m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
        std::size_t p = r;
        while (p < m.rows && m.at(p, c).is_zero()) ++p;
        if (p == m.rows) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols; ++j) std::swap(m.at(r, j), m.at(p, j));
        RationalExpr inv = RationalExpr::from_int(1) / m.at(r, c);
        for (std::size_t j = c; j < m.cols; ++j) m.at(r, j) = m.at(r, j) * inv;
        for (std::size_t i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c).is_zero()) continue;
            RationalExpr factor = m.at(i, c);
            for (std::size_t j = c; j < m.cols; ++j) m.at(i, j) = m.at(i, j) - factor * m.at(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return Rref{std::move(m), std::move(pivots)};
}

std::size_t generic_rank(const ExprMatrix& m) { return rref(m).pivots.size(); }

LinearSolution solve_linear(const ExprMatrix& m, const ExprMatrix& rhs) {
    if (rhs.rows != m.rows) throw InternalError("solve_linear: incompatible shapes");
    ExprMatrix aug(m.rows, m.cols + rhs.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
        for (std::size_t j = 0; j < rhs.cols; ++j) aug.at(i, m.cols + j) = rhs.at(i, j);
    }
    Rref red = rref(std::move(aug));

    LinearSolution sol;
    for (std::size_t i = 0; i < red.pivots.size(); ++i) {
        if (red.pivots[i] >= m.cols) {
            sol.feasible = false;
            sol.certificate_row = i;
            sol.certificate.assign(red.mat.entries.begin() + i * red.mat.cols,
                                   red.mat.entries.begin() + (i + 1) * red.mat.cols);
            return sol;
        }
    }

    for (std::size_t k = 0; k < rhs.cols; ++k) {
        std::vector<RationalExpr> x(m.cols);
        for (std::size_t i = 0; i < red.pivots.size(); ++i) x[red.pivots[i]] = red.mat.at(i, m.cols + k);
        sol.particular.push_back(std::move(x));
    }

    std::vector<bool> is_pivot(m.cols, false);
    for (std::size_t p : red.pivots) is_pivot[p] = true;
    for (std::size_t j = 0; j < m.cols; ++j) {
        if (is_pivot[j]) continue;
        std::vector<RationalExpr> v(m.cols);
        v[j] = RationalExpr::from_int(1);
        for (std::size_t i = 0; i < red.pivots.size(); ++i) v[red.pivots[i]] = -red.mat.at(i, j);
        sol.nullspace.push_back(std::move(v));
    }
    return sol;
}

} // namespace flatness
