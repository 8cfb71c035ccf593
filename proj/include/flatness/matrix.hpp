#pragma once

#include "flatness/expr.hpp"

#include <cstddef>
#include <vector>

namespace flatness {

/// Dense rectangular matrix of rational expressions.
struct ExprMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<RationalExpr> entries;

    ExprMatrix() = default;
    ExprMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}

    RationalExpr& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
    const RationalExpr& at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }

    static ExprMatrix identity(std::size_t n);
};

/// Jacobian matrix d exprs / d vars.
ExprMatrix jacobian(const std::vector<RationalExpr>& exprs, const std::vector<Var>& vars);

struct Rref {
    ExprMatrix mat;
    std::vector<std::size_t> pivots; // pivot column per pivot row
};

/// Reduced row echelon form over the rational function field. Pivots are
/// chosen as the first nonzero entry per column, scanning columns in order,
/// and normalized to one; exact zero tests, no tolerances.
Rref rref(ExprMatrix m);

/// Rank over the function field (rank at a generic point).
std::size_t generic_rank(const ExprMatrix& m);

struct LinearSolution {
    bool feasible = true;
    /// one solution vector per right-hand-side column (empty if infeasible)
    std::vector<std::vector<RationalExpr>> particular;
    std::vector<std::vector<RationalExpr>> nullspace;
    /// on infeasibility: the reduced row 0 = nonzero, with its row index
    std::size_t certificate_row = 0;
    std::vector<RationalExpr> certificate;
};

/// Solves M x = rhs over the function field; rhs has one or more columns.
LinearSolution solve_linear(const ExprMatrix& m, const ExprMatrix& rhs);

} // namespace flatness
