#include "flatness/trajectory.hpp"

#include <algorithm>

namespace flatness {

Trajectory simulate(const SystemModel& s, const std::vector<Rational>& x0,
                    const std::vector<std::vector<Rational>>& u_seq) {
    if (x0.size() != s.n()) throw Error("simulate: x0 must have n entries");
    Trajectory tr;
    tr.horizon = u_seq.size();
    tr.x.push_back(x0);
    for (std::size_t k = 0; k < u_seq.size(); ++k) {
        if (u_seq[k].size() != s.m()) throw Error("simulate: u(k) must have m entries");
        std::map<Var, Rational> point;
        for (std::size_t i = 0; i < s.n(); ++i) point.emplace(s.states[i], tr.x.back()[i]);
        for (std::size_t j = 0; j < s.m(); ++j) point.emplace(s.inputs[j], u_seq[k][j]);
        std::vector<Rational> next(s.n());
        std::vector<Rational> zrow(s.g.size());
        try {
            for (std::size_t i = 0; i < s.n(); ++i) next[i] = evaluate(s.f[i], point);
            for (std::size_t j = 0; j < s.g.size(); ++j) zrow[j] = evaluate(s.g[j], point);
        } catch (const MathError&) {
            throw MathError("denominator vanished at step " + std::to_string(k));
        }
        tr.u.push_back(u_seq[k]);
        if (!s.g.empty()) tr.zeta.push_back(std::move(zrow));
        tr.x.push_back(std::move(next));
    }
    return tr;
}

namespace {

std::vector<Rational> eval_all(const std::vector<RationalExpr>& exprs,
                               const std::map<Var, Rational>& point) {
    std::vector<Rational> out;
    out.reserve(exprs.size());
    for (const auto& e : exprs) out.push_back(evaluate(e, point));
    return out;
}

} // namespace

bool check_correspondence_against(const SystemModel& s, const SystemModel& assoc, std::size_t horizon,
                                  std::size_t seeds, std::uint64_t seed) {
    if (!s.has_extension()) throw Error("check_correspondence requires an extension g");
    const long N = static_cast<long>(horizon);
    const long k = (N + 1) / 2; // midpoint: both directions of the mirror are nonempty

    RationalSampler sampler(seed);
    for (std::size_t run = 0; run < seeds; ++run) {
        Trajectory tr;
        bool simulated = false;
        for (int attempt = 0; attempt < 20 && !simulated; ++attempt) {
            std::vector<Rational> x0;
            for (std::size_t i = 0; i < s.n(); ++i) x0.push_back(sampler.next());
            std::vector<std::vector<Rational>> us;
            for (long t = 0; t < N; ++t) {
                std::vector<Rational> u;
                for (std::size_t j = 0; j < s.m(); ++j) u.push_back(sampler.next());
                us.push_back(std::move(u));
            }
            try {
                tr = simulate(s, x0, us);
                simulated = true;
            } catch (const MathError&) {
            }
        }
        if (!simulated) return false;

        // x(k+l) = z(k-l+1), u(k+l) = eta(k-l), zeta(k+l) = v(k-l)
        auto z_at = [&](long j) { return tr.x[static_cast<std::size_t>(2 * k - j + 1)]; };
        auto v_at = [&](long j) { return tr.zeta[static_cast<std::size_t>(2 * k - j)]; };
        auto eta_at = [&](long j) { return tr.u[static_cast<std::size_t>(2 * k - j)]; };

        for (long j = 2 * k - N + 1; j <= 2 * k; ++j) {
            std::map<Var, Rational> point;
            auto zj = z_at(j);
            auto vj = v_at(j);
            for (std::size_t i = 0; i < assoc.n(); ++i) point.emplace(assoc.states[i], zj[i]);
            for (std::size_t c = 0; c < assoc.m(); ++c) point.emplace(assoc.inputs[c], vj[c]);
            try {
                std::vector<Rational> znext = eval_all(assoc.f, point);
                if (znext != z_at(j + 1)) return false;
                std::vector<Rational> eta = eval_all(assoc.g, point);
                if (eta != eta_at(j)) return false;
            } catch (const MathError&) {
                return false;
            }
        }
    }
    return true;
}

bool check_correspondence(const SystemModel& s, std::size_t horizon, std::size_t seeds,
                          std::uint64_t seed) {
    if (!s.inverse) throw Error("check_correspondence requires the inverse map");
    return check_correspondence_against(s, build_associated(s), horizon, seeds, seed);
}

bool check_parameterization_roundtrip(const SystemModel& s, const Parameterization& p,
                                      const FlatOutputCandidate& cand, std::size_t horizon,
                                      std::size_t seeds, std::uint64_t seed) {
    const std::size_t m = s.m();
    int max_r1 = 0, max_r2 = 0, max_q1 = 0, max_q2 = 0;
    for (std::size_t j = 0; j < m; ++j) {
        max_r1 = std::max(max_r1, p.r1[j]);
        max_r2 = std::max(max_r2, p.r2[j]);
        max_q1 = std::max(max_q1, cand.q1[j]);
        max_q2 = std::max(max_q2, cand.q2[j]);
    }
    const long base = max_r1;
    const long length = static_cast<long>(horizon) + max_r1 + max_r2;

    RationalSampler sampler(seed);
    for (std::size_t run = 0; run < seeds; ++run) {
        bool ok = false;
        for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
            std::vector<std::vector<Rational>> y(m, std::vector<Rational>(length));
            for (std::size_t j = 0; j < m; ++j)
                for (long t = 0; t < length; ++t) y[j][t] = sampler.next();

            auto y_point = [&](long step) {
                std::map<Var, Rational> point;
                for (std::size_t j = 0; j < m; ++j)
                    for (long t = -max_r1; t <= max_r2; ++t) {
                        long at = step + t;
                        if (at >= 0 && at < length)
                            point.emplace(Var(p.output_names[j], static_cast<int>(t)),
                                          y[j][static_cast<std::size_t>(at)]);
                    }
                return point;
            };

            try {
                const long k_lo = base, k_hi = base + static_cast<long>(horizon) - 1;
                std::vector<std::vector<Rational>> xs, us, zs;
                for (long step = k_lo; step <= k_hi; ++step) {
                    auto point = y_point(step);
                    xs.push_back(eval_all(p.f_x, point));
                    us.push_back(eval_all(p.f_u, point));
                    std::map<Var, Rational> xu;
                    for (std::size_t i = 0; i < s.n(); ++i) xu.emplace(s.states[i], xs.back()[i]);
                    for (std::size_t j = 0; j < m; ++j) xu.emplace(s.inputs[j], us.back()[j]);
                    zs.push_back(eval_all(s.g, xu));
                }
                // system equations along the reconstruction
                for (long step = k_lo; step < k_hi; ++step) {
                    std::map<Var, Rational> xu;
                    std::size_t idx = static_cast<std::size_t>(step - k_lo);
                    for (std::size_t i = 0; i < s.n(); ++i) xu.emplace(s.states[i], xs[idx][i]);
                    for (std::size_t j = 0; j < m; ++j) xu.emplace(s.inputs[j], us[idx][j]);
                    if (eval_all(s.f, xu) != xs[idx + 1]) return false;
                }
                // the candidate reproduces the drawn outputs
                for (long step = k_lo + max_q1; step <= k_hi - max_q2; ++step) {
                    std::size_t idx = static_cast<std::size_t>(step - k_lo);
                    std::map<Var, Rational> point;
                    for (std::size_t i = 0; i < s.n(); ++i) point.emplace(s.states[i], xs[idx][i]);
                    for (std::size_t j = 0; j < m; ++j)
                        for (int t = 0; t <= max_q2; ++t)
                            if (idx + static_cast<std::size_t>(t) < us.size())
                                point.emplace(Var(s.inputs[j].name, t), us[idx + t][j]);
                    for (std::size_t j = 0; j < s.zeta.size(); ++j)
                        for (int t = 1; t <= max_q1; ++t)
                            if (static_cast<long>(idx) - t >= 0)
                                point.emplace(Var(s.zeta[j].name, -t), zs[idx - t][j]);
                    for (std::size_t j = 0; j < m; ++j) {
                        Rational got = evaluate(cand.components[j], point);
                        if (got != y[j][static_cast<std::size_t>(step)]) return false;
                    }
                }
                ok = true;
            } catch (const MathError&) {
                // pole hit by the random outputs; resample
            }
        }
        if (!ok) return false;
    }
    return true;
}

} // namespace flatness
