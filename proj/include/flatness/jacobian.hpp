#pragma once

#include "flatness/flat_output.hpp"
#include "flatness/matrix.hpp"

namespace flatness {

/// Column layout of the extended Jacobian: columns are grouped by relative
/// shift level t = 0 .. max(r1_j + r2_j); level t holds, for each output
/// component j with t <= r1_j + r2_j, the variable y_j@(t - r1_j), components
/// in ascending order. Level 0 is the y_[-R1] block, the last level of each
/// component is its y_[R2] column.
struct JacobianLayout {
    std::vector<Var> column_vars;
    std::vector<std::pair<int, std::size_t>> column_levels; // (level, component)

    std::size_t column_of(const Var& v) const;
};

struct ExtendedJacobian {
    ExprMatrix mat; // rows: F_x (n), F_u (m), F_g (m)
    JacobianLayout layout;
    std::size_t n = 0, m = 0;
};

/// Jacobian of (F_x, F_u, g(F_x, F_u)) with respect to all shifted output
/// variables. The top-right block (F_x rows at the y_[R2] columns) is checked
/// to be structurally zero.
ExtendedJacobian build_extended_jacobian(const Parameterization& p);

enum class RankMode { forward, backward, general };

/// Generic ranks of the four designated blocks of the extended Jacobian and
/// the induced flags. `high_ranks_equal` states that the F_x block over
/// y_[R2-1] and the F_u block over y_[R2] have equal rank; `forward_pattern`
/// holds when the deep blocks have rank m with R1 = 0 and the high blocks are
/// rank-deficient, `backward_pattern` when the deep blocks are deficient and
/// the high blocks have rank m with R2 = 0.
struct RankReport {
    std::size_t rank_fx_deep = 0;  // d_{y[-R1]} F_x
    std::size_t rank_fg_deep = 0;  // d_{y[-R1]} g(F_x, F_u)
    std::size_t rank_fx_high = 0;  // d_{y[R2-1]} F_x
    std::size_t rank_fu_high = 0;  // d_{y[R2]} F_u
    bool high_ranks_equal = false;
    bool forward_pattern = false;
    bool backward_pattern = false;
    RankMode mode = RankMode::general;
};

RankReport check_rank_conditions(const Parameterization& p, RankMode mode);

} // namespace flatness
