#include "flatness/backward.hpp"
#include "flatness/jacobian.hpp"
#include "flatness/report.hpp"
#include "flatness/trajectory.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

using namespace flatness;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitRefuted = 2;
constexpr int kExitInconclusive = 3;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("FLATNESS_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

json system_summary(const SystemModel& s) {
    json j = system_to_json(s);
    j["n"] = s.n();
    j["m"] = s.m();
    return j;
}

void emit(const json& report, bool as_json) {
    if (as_json)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << render_human(report);
}

int run_validate(const std::string& file, bool as_json, std::uint64_t seed) {
    json report = report_skeleton(seed);
    try {
        SystemModel s = load_system_file(file);
        report["system"] = system_summary(s);
        report["validation"] = {{"ok", true}};
        emit(report, as_json);
        return kExitOk;
    } catch (const ValidationError& e) {
        report["validation"] = {{"ok", false}, {"message", e.what()}};
        emit(report, as_json);
        return kExitRefuted;
    }
}

RankMode infer_mode(const Parameterization& p) {
    bool r1_zero = true, r2_zero = true;
    for (int r : p.r1) r1_zero = r1_zero && r == 0;
    for (int r : p.r2) r2_zero = r2_zero && r == 0;
    if (r1_zero && !r2_zero) return RankMode::forward;
    if (r2_zero && !r1_zero) return RankMode::backward;
    return RankMode::general;
}

/// Verification + rank checks + exact point checks for a certified candidate.
void attach_verification(json& report, const SystemModel& s, const FlatOutputCandidate& cand,
                         const VerifyResult& vr, std::uint64_t seed, json& timings) {
    json v;
    v["status"] = vr.status == VerifyStatus::certified    ? "certified"
                  : vr.status == VerifyStatus::refuted    ? "failed"
                                                          : "inconclusive";
    if (!vr.message.empty()) v["message"] = vr.message;
    if (!vr.residuals.empty()) {
        json res = json::array();
        for (const auto& [label, e] : vr.residuals)
            res.push_back({{"equation", label}, {"residual", to_string(e)}});
        v["residuals"] = res;
    }
    if (vr.parameterization) {
        v["parameterization"] = parameterization_to_json(*vr.parameterization);
        RankMode mode = infer_mode(*vr.parameterization);
        Timer t;
        report["ranks"] = rank_report_to_json(check_rank_conditions(*vr.parameterization, mode));
        timings["rank_checks"] = t.ms();

        Timer t2;
        bool rt = check_parameterization_roundtrip(s, *vr.parameterization, cand, 10, 10, seed);
        timings["roundtrip"] = t2.ms();
        report["trajectory"]["roundtrip"] = {{"N", 10}, {"seeds", 10}, {"pass", rt}};
    }
    report["verification"] = std::move(v);
}

int run_test(const std::string& file, const std::string& mode, bool derive, int max_degree,
             bool as_json, bool with_timings, std::uint64_t seed) {
    json report = report_skeleton(seed);
    json timings;
    SystemModel s0 = load_system_file(file);
    report["system"] = system_summary(s0);
    report["validation"] = {{"ok", true}};

    SystemModel s;
    try {
        Timer t;
        s = ensure_inverse(s0, seed);
        timings["ensure_inverse"] = t.ms();
    } catch (const InversionError& e) {
        report["inconclusive"] = std::string("extended map not invertible by elimination: ") + e.what();
        if (with_timings) report["timings"] = timings;
        emit(report, as_json);
        return kExitInconclusive;
    }

    bool want_forward = mode == "forward" || mode == "both";
    bool want_backward = mode == "backward" || mode == "both";
    bool any_flat = false;

    std::optional<SequenceRecord> fwd;
    if (want_forward) {
        Timer t;
        fwd = forward_flatness_test(s);
        timings["forward_test"] = t.ms();
        report["forward"] = sequence_to_json(*fwd);
        any_flat = any_flat || fwd->forward_flat;
    }

    std::optional<FlatOutputCandidate> derived;
    if (want_backward) {
        Timer t;
        BackwardVerdict bwd = backward_flatness_test(s, derive, max_degree, seed);
        timings["backward_test"] = t.ms();
        json b;
        b["verdict"] = bwd.status == BackwardStatus::backward_flat       ? "backward-flat"
                       : bwd.status == BackwardStatus::not_backward_flat ? "not-backward-flat"
                                                                         : "inconclusive";
        b["message"] = bwd.message;
        if (bwd.associated) b["associated"] = system_summary(*bwd.associated);
        if (bwd.forward_record) b["forward_record_on_associated"] = sequence_to_json(*bwd.forward_record);
        if (bwd.derivation_attempted) {
            b["derivation"] = bwd.derivation_message;
            if (bwd.associated_output) b["associated_output"] = candidate_to_json(*bwd.associated_output);
        }
        report["backward"] = std::move(b);
        any_flat = any_flat || bwd.status == BackwardStatus::backward_flat;
        if (bwd.derived_output) derived = bwd.derived_output;
    }

    // a forward-flat system also gets a derived output when asked for one
    if (derive && !derived && want_forward && fwd && fwd->forward_flat) {
        DeriveResult dr = derive_forward_flat_output(s, *fwd, max_degree);
        if (dr.ok) derived = dr.candidate;
    }

    if (derived) {
        report["derived_output"] = candidate_to_json(*derived);
        Timer t;
        VerifyResult vr = verify_flat_output(s, *derived, static_cast<int>(s.n()),
                                             static_cast<int>(s.n()));
        timings["verify"] = t.ms();
        attach_verification(report, s, *derived, vr, seed, timings);

        Timer t2;
        bool corr = check_correspondence(s, 10, 25, seed);
        timings["correspondence"] = t2.ms();
        report["trajectory"]["correspondence"] = {{"N", 10}, {"seeds", 25}, {"pass", corr}};
    }

    if (with_timings) report["timings"] = timings;
    emit(report, as_json);
    return any_flat ? kExitOk : kExitRefuted;
}

int run_verify(const std::string& file, const std::string& cand_file, int max_back, int max_fwd,
               bool as_json, bool with_timings, std::uint64_t seed) {
    json report = report_skeleton(seed);
    json timings;
    SystemModel s0 = load_system_file(file);
    report["system"] = system_summary(s0);

    SystemModel s;
    try {
        s = ensure_inverse(s0, seed);
    } catch (const InversionError& e) {
        report["inconclusive"] = std::string("extended map not invertible by elimination: ") + e.what();
        emit(report, as_json);
        return kExitInconclusive;
    }

    FlatOutputCandidate cand = load_candidate_file(s, cand_file);
    report["candidate"] = candidate_to_json(cand);
    if (max_back < 0) max_back = static_cast<int>(s.n());
    if (max_fwd < 0) max_fwd = static_cast<int>(s.n());

    Timer t;
    VerifyResult vr = verify_flat_output(s, cand, max_back, max_fwd);
    timings["verify"] = t.ms();
    attach_verification(report, s, cand, vr, seed, timings);

    if (with_timings) report["timings"] = timings;
    emit(report, as_json);
    if (vr.status == VerifyStatus::certified) return kExitOk;
    if (vr.status == VerifyStatus::refuted) return kExitRefuted;
    return kExitInconclusive;
}

int run_associated(const std::string& file, std::uint64_t seed) {
    SystemModel s = ensure_inverse(load_system_file(file), seed);
    std::cout << system_to_json(build_associated(s)).dump(2) << "\n";
    return kExitOk;
}

int run_simcheck(const std::string& file, std::size_t horizon, std::size_t seeds, bool as_json,
                 std::uint64_t seed) {
    json report = report_skeleton(seed);
    SystemModel s0 = load_system_file(file);
    report["system"] = system_summary(s0);
    SystemModel s;
    try {
        s = ensure_inverse(s0, seed);
    } catch (const InversionError& e) {
        report["inconclusive"] = std::string("extended map not invertible by elimination: ") + e.what();
        emit(report, as_json);
        return kExitInconclusive;
    }
    bool pass = check_correspondence(s, horizon, seeds, seed);
    report["trajectory"]["correspondence"] = {{"N", horizon}, {"seeds", seeds}, {"pass", pass}};
    emit(report, as_json);
    return pass ? kExitOk : kExitRefuted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flatcheck: forward- and backward-flatness tests for discrete-time rational systems"};
    app.require_subcommand(1);
    std::uint64_t seed = default_seed();
    app.add_option("--seed", seed, "PRNG seed (default: FLATNESS_SEED env var or 0)");

    std::string file, cand_file, mode = "both";
    bool as_json = false, with_timings = false, derive = false;
    int max_degree = 3, max_back = -1, max_fwd = -1;
    std::size_t horizon = 10, seeds = 100;

    auto* validate = app.add_subcommand("validate", "check the system file and its rank conditions");
    validate->add_option("file", file)->required();
    validate->add_flag("--json", as_json);

    auto* test = app.add_subcommand("test", "run the flatness tests");
    test->add_option("file", file)->required();
    test->add_option("--mode", mode, "forward | backward | both")
        ->check(CLI::IsMember({"forward", "backward", "both"}));
    test->add_flag("--derive", derive, "also derive, verify and rank-check a flat output");
    test->add_option("--max-degree", max_degree, "degree bound for the first-integral search");
    test->add_flag("--json", as_json);
    test->add_flag("--timings", with_timings, "include wall-clock timings in the report");
    test->add_option("--seed", seed);

    auto* verify = app.add_subcommand("verify", "verify a flat-output candidate");
    verify->add_option("file", file)->required();
    verify->add_option("--output", cand_file, "candidate file")->required();
    verify->add_option("--max-back", max_back, "backward shift window (default n)");
    verify->add_option("--max-fwd", max_fwd, "forward shift window (default n)");
    verify->add_flag("--json", as_json);
    verify->add_flag("--timings", with_timings);
    verify->add_option("--seed", seed);

    auto* associated = app.add_subcommand("associated", "print the associated system as a system file");
    associated->add_option("file", file)->required();

    auto* simcheck = app.add_subcommand("simcheck", "exact trajectory correspondence check");
    simcheck->add_option("file", file)->required();
    simcheck->add_option("--horizon", horizon);
    simcheck->add_option("--seeds", seeds);
    simcheck->add_flag("--json", as_json);
    simcheck->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return run_validate(file, as_json, seed);
        if (test->parsed()) return run_test(file, mode, derive, max_degree, as_json, with_timings, seed);
        if (verify->parsed())
            return run_verify(file, cand_file, max_back, max_fwd, as_json, with_timings, seed);
        if (associated->parsed()) return run_associated(file, seed);
        if (simcheck->parsed()) return run_simcheck(file, horizon, seeds, as_json, seed);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRefuted;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
