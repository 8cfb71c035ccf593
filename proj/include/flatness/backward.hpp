#pragma once

#include "flatness/flat_output.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace flatness {

enum class BackwardStatus { backward_flat, not_backward_flat, inconclusive };

/// Outcome of the backward-flatness test: the verdict is the forward-flatness
/// verdict of the associated system.
struct BackwardVerdict {
    BackwardStatus status = BackwardStatus::inconclusive;
    std::string message;
    std::optional<SystemModel> associated;
    std::optional<SequenceRecord> forward_record;          // sequence on the associated system
    std::optional<FlatOutputCandidate> associated_output;  // state-dependent output of the associated system
    std::optional<FlatOutputCandidate> derived_output;     // transferred (x,u)-output of the original
    bool derivation_attempted = false;
    std::string derivation_message;
};

/// Builds the associated system, runs the forward-flatness test on it and, if
/// `derive` is set and the verdict is positive, derives a state-dependent
/// flat output of the associated system and transfers it to the original. An
/// inversion failure yields an inconclusive verdict, never a negative one.
BackwardVerdict backward_flatness_test(const SystemModel& s, bool derive, int max_degree,
                                       std::uint64_t seed = 0);

/// Transfer y = yhat(f(x, u)): substitutes the transition expressions for the
/// associated states. The candidate must depend on the associated states only
/// (no inputs, no shifts); otherwise an Error is thrown.
FlatOutputCandidate map_output_to_original(const FlatOutputCandidate& yhat, const SystemModel& assoc,
                                           const SystemModel& original);

} // namespace flatness
