#include "flatness/backward.hpp"

namespace flatness {

FlatOutputCandidate map_output_to_original(const FlatOutputCandidate& yhat, const SystemModel& assoc,
                                           const SystemModel& original) {
    std::map<Var, RationalExpr> into_f;
    for (std::size_t i = 0; i < assoc.n(); ++i) into_f.emplace(assoc.states[i], original.f[i]);

    FlatOutputCandidate out;
    out.output_names = default_output_names(original);
    out.q1.assign(original.m(), 0);
    out.q2.assign(original.m(), 0);
    for (const auto& comp : yhat.components) {
        for (const auto& v : comp.vars()) {
            bool is_state = false;
            for (const auto& z : assoc.states)
                if (z == v) is_state = true;
            if (!is_state)
                throw Error("unsupported candidate: output transfer needs a state-dependent output, "
                            "but it references " +
                            to_string(v));
        }
        out.components.push_back(substitute(comp, into_f));
    }
    return out;
}

BackwardVerdict backward_flatness_test(const SystemModel& s, bool derive, int max_degree,
                                       std::uint64_t seed) {
    BackwardVerdict out;
    SystemModel extended;
    try {
        extended = ensure_inverse(s, seed);
    } catch (const InversionError& e) {
        out.status = BackwardStatus::inconclusive;
        out.message = std::string("test inconclusive: extended map not invertible by elimination (") +
                      e.what() + ")";
        return out;
    }

    SystemModel assoc = build_associated(extended);
    SequenceRecord rec = forward_flatness_test(assoc);
    out.forward_record = rec;
    out.status = rec.forward_flat ? BackwardStatus::backward_flat : BackwardStatus::not_backward_flat;
    out.message = rec.forward_flat ? "associated system is forward-flat"
                                   : "associated system is not forward-flat";

    if (derive && rec.forward_flat) {
        out.derivation_attempted = true;
        DeriveResult dr = derive_forward_flat_output(assoc, rec, max_degree);
        if (dr.ok) {
            out.associated_output = dr.candidate;
            out.derived_output = map_output_to_original(dr.candidate, assoc, extended);
            out.derivation_message = "derived";
        } else {
            out.derivation_message = "flat output not derived: " + dr.message;
        }
    }
    out.associated = std::move(assoc);
    return out;
}

} // namespace flatness
