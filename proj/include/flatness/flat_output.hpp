#pragma once

#include "flatness/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flatness {

/// Candidate flat output: m expressions in states (shift 0), inputs
/// (shifts >= 0) and extension outputs (shifts <= -1). `q1`/`q2` record the
/// observed backward zeta depth and forward input depth per component.
struct FlatOutputCandidate {
    std::vector<std::string> output_names; // the y-variable names used by parameterizations
    std::vector<RationalExpr> components;
    std::vector<int> q1, q2;
};

/// Parameterizing map: states, inputs and extension outputs expressed in the
/// shifted output variables. F_x uses shifts of y_j within [-r1_j, r2_j - 1],
/// F_u and F_g within [-r1_j, r2_j].
struct Parameterization {
    std::vector<std::string> output_names;
    std::vector<RationalExpr> f_x, f_u, f_g;
    std::vector<int> r1, r2;
};

/// Exact k-fold forward (k > 0) or backward (k < 0) shift of an expression in
/// the coordinates (..., zeta@-1, x, u, u@1, ...). States are replaced by f,
/// backward state/input shifts go through the inverse map; variables not
/// belonging to the system are shifted freely. Throws MathError when the
/// required extension or inverse is missing.
RationalExpr shift_expr(const RationalExpr& e, int k, const SystemModel& s);

/// Polynomials of total degree <= max_degree in candidate_vars annihilated by
/// every basis field of d (constants excluded), as a deterministic basis of
/// the coefficient solution space.
std::vector<RationalExpr> first_integrals(const Distribution& d, const std::vector<Var>& candidate_vars,
                                          int max_degree);

enum class VerifyStatus { certified, refuted, inconclusive };

struct VerifyResult {
    VerifyStatus status = VerifyStatus::inconclusive;
    std::optional<Parameterization> parameterization;
    /// leftover equations (label, expression) when not certified
    std::vector<std::pair<std::string, RationalExpr>> residuals;
    std::string message;
};

/// Generates the shift equations y_j@s = delta^s(candidate_j) over the window
/// [-max_back, max_fwd], eliminates by triangular substitution and certifies
/// the round-trip and dynamics identities of the resulting parameterization.
/// `refuted` means a forced nontrivial relation among the outputs appeared;
/// `inconclusive` means elimination stalled inside the window.
VerifyResult verify_flat_output(const SystemModel& s, const FlatOutputCandidate& cand, int max_back,
                                int max_fwd);

struct DeriveResult {
    bool ok = false;
    FlatOutputCandidate candidate;
    std::string message;
};

/// Best-effort search for a state-dependent forward-flat output: polynomial
/// first integrals of the state parts of the E_k sequence (deepest step
/// first), combined into functionally independent m-tuples and certified via
/// verify_flat_output. Failure proves nothing; the verdict in `rec` stands.
DeriveResult derive_forward_flat_output(const SystemModel& s, const SequenceRecord& rec, int max_degree);

/// Output names y1..ym, switching prefix if a system variable collides.
std::vector<std::string> default_output_names(const SystemModel& s);

/// Builds a candidate from expression strings over the system's variables
/// (zeta names resolve to the extension outputs); validates the shift windows
/// and fills q1/q2 from the observed shifts.
FlatOutputCandidate make_candidate(const SystemModel& s, const std::vector<std::string>& texts);

/// Candidate file: {"outputs": [expr-string], "vars": {"zeta": [str]}?}
FlatOutputCandidate load_candidate(const SystemModel& s, const std::string& json_text);
FlatOutputCandidate load_candidate_file(const SystemModel& s, const std::string& path);

} // namespace flatness
