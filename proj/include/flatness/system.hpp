#pragma once

#include "flatness/expr.hpp"
#include "flatness/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace flatness {

/// Inverse of the extended map (f, g): expresses the current state and input
/// in terms of the successor state x+ (state variables at shift +1) and the
/// extension outputs zeta (shift 0).
struct InverseMap {
    std::vector<Var> xplus;             // Var(state.name, +1), aligned with states
    std::vector<Var> zeta;              // aligned with g
    std::vector<RationalExpr> psi_x;    // n expressions in (xplus, zeta)
    std::vector<RationalExpr> psi_u;    // m expressions in (xplus, zeta)
};

/// A discrete-time system x+ = f(x, u), optionally extended by zeta = g(x, u)
/// so that (f, g) is generically invertible.
struct SystemModel {
    std::string name;
    std::vector<Var> states;            // shift 0
    std::vector<Var> inputs;            // shift 0
    std::vector<RationalExpr> f;        // n transition expressions in (states, inputs)
    std::vector<RationalExpr> g;        // m extension expressions, empty if not chosen
    std::vector<Var> zeta;              // extension output names, empty iff g empty
    std::optional<InverseMap> inverse;

    std::size_t n() const { return states.size(); }
    std::size_t m() const { return inputs.size(); }
    bool has_extension() const { return !g.empty(); }

    std::vector<Var> chart() const; // states followed by inputs
};

/// Parses and validates a system file; throws SchemaError / ParseError on
/// malformed input and ValidationError on rank violations.
SystemModel load_system(const std::string& json_text);
SystemModel load_system_file(const std::string& path);

/// Checks Rank(d_u f) = m, Rank(d_(x,u) f) = n, extension regularity and the
/// inverse-map composition identities. Throws ValidationError naming the
/// violated condition.
void validate_system(const SystemModel& s);

/// Picks m coordinate functions (states first, then inputs, ascending) that
/// make the extended Jacobian generically nonsingular; falls back to seeded
/// random linear combinations of coordinates if the greedy search fails.
std::vector<RationalExpr> choose_extension(const SystemModel& s, std::uint64_t seed = 0);

/// Inverts (f, g) by triangular elimination and certifies both composition
/// identities symbolically. Throws InversionError if elimination gets stuck.
InverseMap invert_extended_map(const SystemModel& s);

/// Returns a copy with g, zeta and inverse filled in (choosing an extension
/// and inverting as needed). A user-supplied inverse is kept as-is.
SystemModel ensure_inverse(const SystemModel& s, std::uint64_t seed = 0);

/// The associated system z+ = psi_x(z, v), eta = psi_u(z, v), with states
/// z1..zn, inputs v1..vm and extension outputs eta1..etam. Its inverse is
/// (f, g) under the same renaming, so associating twice reproduces the
/// original system up to the renaming.
SystemModel build_associated(const SystemModel& s);

/// Serializes in the system-file schema (reloadable by load_system).
nlohmann::json system_to_json(const SystemModel& s);

} // namespace flatness
