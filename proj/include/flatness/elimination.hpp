#pragma once

#include "flatness/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flatness {

/// Result of triangular elimination on a set of equations `expr = 0`.
struct Elimination {
    /// Solved unknowns, fully back-substituted against each other.
    std::map<Var, RationalExpr> solutions;
    /// Remaining nonzero equations still containing unknowns (label, expr).
    std::vector<std::pair<std::string, RationalExpr>> residuals;
    /// A nonzero equation free of all unknowns, if one appeared: the system
    /// is inconsistent (for flat-output checks, a forced relation among the
    /// outputs). Elimination stops when this happens.
    std::optional<std::pair<std::string, RationalExpr>> contradiction;

    bool solved_all(const std::vector<Var>& required) const {
        for (const auto& v : required)
            if (!solutions.count(v)) return false;
        return true;
    }
};

/// Repeatedly picks an equation whose numerator is linear in one unsolved
/// unknown and solves for it, substituting everywhere. Equations with an
/// unknown-free coefficient are preferred; within a sweep, equations are
/// visited in the given order and unknowns in the given priority order.
Elimination eliminate_triangular(std::vector<std::pair<std::string, RationalExpr>> equations,
                                 const std::vector<Var>& unknowns);

} // namespace flatness
