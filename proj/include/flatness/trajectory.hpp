#pragma once

#include "flatness/flat_output.hpp"
#include "flatness/system.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace flatness {

/// Exact rational trajectory: states x(0..N), inputs u(0..N-1) and extension
/// outputs zeta(0..N-1) satisfying the system equations at every step.
struct Trajectory {
    std::size_t horizon = 0;
    std::vector<std::vector<Rational>> x, u, zeta;
};

/// Draws rationals with numerator in [-9, 9] and denominator in [1, 9].
class RationalSampler {
public:
    explicit RationalSampler(std::uint64_t seed) : rng_(seed) {}
    Rational next() {
        std::uniform_int_distribution<int> num(-9, 9);
        std::uniform_int_distribution<int> den(1, 9);
        return Rational(num(rng_), den(rng_));
    }

private:
    std::mt19937_64 rng_;
};

/// Iterates f exactly; throws MathError naming the step if a denominator of
/// f or g vanishes along the run.
Trajectory simulate(const SystemModel& s, const std::vector<Rational>& x0,
                    const std::vector<std::vector<Rational>>& u_seq);

/// Samples trajectories of s, mirrors them about the horizon midpoint into
/// (z, v, eta) sequences and checks the equations of the given associated
/// system exactly; true iff every seed passes.
bool check_correspondence_against(const SystemModel& s, const SystemModel& assoc, std::size_t horizon,
                                  std::size_t seeds, std::uint64_t seed);

/// Same, against build_associated(s).
bool check_correspondence(const SystemModel& s, std::size_t horizon, std::size_t seeds,
                          std::uint64_t seed);

/// Draws random output trajectories, reconstructs (x, u) through the
/// parameterization and checks the system equations and the candidate
/// round-trip exactly; true iff every seed passes.
bool check_parameterization_roundtrip(const SystemModel& s, const Parameterization& p,
                                      const FlatOutputCandidate& cand, std::size_t horizon,
                                      std::size_t seeds, std::uint64_t seed);

} // namespace flatness
