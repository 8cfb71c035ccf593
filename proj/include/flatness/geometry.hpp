#pragma once

#include "flatness/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flatness {

/// Vector field on a chart: one coefficient expression per chart coordinate.
struct VectorField {
    std::vector<Var> chart;
    std::vector<RationalExpr> coeffs;
};

/// Span of generically independent vector fields, stored in canonical reduced
/// echelon form (pivot order follows the chart order).
struct Distribution {
    std::vector<Var> chart;
    std::vector<VectorField> basis;
    std::size_t dim() const { return basis.size(); }
};

std::string to_string(const VectorField& v);

VectorField unit_field(const std::vector<Var>& chart, std::size_t index);
/// Canonicalizes the rows (reduced echelon form, zero rows dropped).
Distribution make_distribution(std::vector<Var> chart, std::vector<std::vector<RationalExpr>> rows);

bool span_contains(const Distribution& d, const VectorField& v);
bool span_equal(const Distribution& a, const Distribution& b);

/// [a, b]^i = a(b^i) - b(a^i); both fields must share the chart.
VectorField lie_bracket(const VectorField& a, const VectorField& b);

/// Kernel of the tangent map of f on the chart (states, inputs); its
/// dimension equals m under the submersivity condition.
Distribution kernel_distribution(const SystemModel& s);

/// Pushes the span of d forward through f: multiplies the basis by the
/// Jacobian of f, re-expresses the coefficients in (x+, zeta) through the
/// inverse map and takes the canonical echelon span. The echelon basis must
/// be zeta-free; otherwise d was not projectable and InternalError is thrown
/// (callers must pass projectable distributions). Result lives on the chart
/// of the successor states (shift +1 variables).
Distribution pushforward_distribution(const SystemModel& s, const Distribution& d);

/// Largest subdistribution D of e with [V, D] contained in D + V for the
/// vertical distribution V = kernel_distribution(s), computed by a fixed
/// point iteration over the function field and certified afterwards by an
/// actual pushforward.
Distribution largest_projectable_subdistribution(const SystemModel& s, const Distribution& e);

/// Renames the successor chart back to shift 0 and appends the input
/// directions; result lives on (states, inputs).
Distribution lift_and_extend(const Distribution& delta, const SystemModel& s);

struct SequenceStep {
    Distribution E;
    bool involutive = true;                 // all pairwise brackets stay in the span
    std::optional<Distribution> D;          // largest projectable subdistribution of E
    std::optional<Distribution> Delta;      // pushforward that produced this step's E
};

struct SequenceRecord {
    std::vector<SequenceStep> steps;        // E_0 .. E_last
    std::vector<std::size_t> dims;          // dim E_k
    std::size_t kbar = 0;                   // stop index
    bool forward_flat = false;
};

/// Runs the distribution sequence E_0 = span{d/du} and E_k derived from the
/// pushforward of the largest projectable subdistribution of E_{k-1}; stops
/// when the dimension stalls or reaches n + m. Requires the inverse map.
SequenceRecord forward_flatness_test(const SystemModel& s);

} // namespace flatness
