#include "flatness/report.hpp"

#include <sstream>

namespace flatness {

using nlohmann::json;

json report_skeleton(std::uint64_t seed) {
    json j;
    j["schema"] = kReportSchema;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["seed"] = seed;
    return j;
}

namespace {

json distribution_to_json(const Distribution& d) {
    json j;
    std::vector<std::string> chart, basis;
    for (const auto& v : d.chart) chart.push_back(to_string(v));
    for (const auto& f : d.basis) basis.push_back(to_string(f));
    j["chart"] = chart;
    j["basis"] = basis;
    j["dim"] = d.dim();
    return j;
}

std::vector<std::string> expr_strings(const std::vector<RationalExpr>& es) {
    std::vector<std::string> out;
    for (const auto& e : es) out.push_back(to_string(e));
    return out;
}

} // namespace

json sequence_to_json(const SequenceRecord& rec) {
    json j;
    j["dims"] = rec.dims;
    j["kbar"] = rec.kbar;
    j["verdict"] = rec.forward_flat ? "forward-flat" : "not-forward-flat";
    json steps = json::array();
    for (std::size_t k = 0; k < rec.steps.size(); ++k) {
        json step;
        step["k"] = k;
        step["E"] = distribution_to_json(rec.steps[k].E);
        step["involutive"] = rec.steps[k].involutive;
        if (rec.steps[k].D) step["D"] = distribution_to_json(*rec.steps[k].D);
        if (rec.steps[k].Delta) step["pushforward"] = distribution_to_json(*rec.steps[k].Delta);
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    return j;
}

json candidate_to_json(const FlatOutputCandidate& cand) {
    json j;
    j["outputs"] = expr_strings(cand.components);
    j["output_names"] = cand.output_names;
    j["Q1"] = cand.q1;
    j["Q2"] = cand.q2;
    return j;
}

json parameterization_to_json(const Parameterization& p) {
    json j;
    j["F_x"] = expr_strings(p.f_x);
    j["F_u"] = expr_strings(p.f_u);
    j["F_g"] = expr_strings(p.f_g);
    j["R1"] = p.r1;
    j["R2"] = p.r2;
    j["output_names"] = p.output_names;
    return j;
}

json rank_report_to_json(const RankReport& rep) {
    json j;
    j["rank_d_y_minus_R1_Fx"] = rep.rank_fx_deep;
    j["rank_d_y_minus_R1_Fg"] = rep.rank_fg_deep;
    j["rank_d_y_R2_minus_1_Fx"] = rep.rank_fx_high;
    j["rank_d_y_R2_Fu"] = rep.rank_fu_high;
    j["high_ranks_equal"] = rep.high_ranks_equal;
    j["forward_pattern"] = rep.forward_pattern;
    j["backward_pattern"] = rep.backward_pattern;
    j["mode"] = rep.mode == RankMode::forward    ? "forward"
                : rep.mode == RankMode::backward ? "backward"
                                                 : "general";
    return j;
}

namespace {

void render_sequence(std::ostringstream& out, const json& seq, const std::string& indent) {
    out << indent << "dims:";
    for (const auto& d : seq.at("dims")) out << " " << d.get<std::size_t>();
    out << "   (stop index " << seq.at("kbar").get<std::size_t>() << ")\n";
    out << indent << "verdict: " << seq.at("verdict").get<std::string>() << "\n";
    for (const auto& step : seq.at("steps")) {
        std::size_t k = step.at("k").get<std::size_t>();
        out << indent << "E_" << k << " = span{";
        bool first = true;
        for (const auto& b : step.at("E").at("basis")) {
            if (!first) out << ", ";
            out << b.get<std::string>();
            first = false;
        }
        out << "}";
        if (!step.at("involutive").get<bool>()) out << "   [warning: not involutive]";
        out << "\n";
        if (step.contains("D")) {
            out << indent << "D_" << k << " = span{";
            first = true;
            for (const auto& b : step.at("D").at("basis")) {
                if (!first) out << ", ";
                out << b.get<std::string>();
                first = false;
            }
            out << "}\n";
        }
    }
}

void render_outputs(std::ostringstream& out, const json& j) {
    if (j.contains("derived_output")) {
        out << "derived flat output:\n";
        const auto& cand = j.at("derived_output");
        const auto& names = cand.at("output_names");
        const auto& comps = cand.at("outputs");
        for (std::size_t i = 0; i < comps.size(); ++i)
            out << "  " << names[i].get<std::string>() << " = " << comps[i].get<std::string>() << "\n";
    }
    if (j.contains("verification")) {
        const auto& v = j.at("verification");
        out << "verification: " << v.at("status").get<std::string>() << "\n";
        if (v.contains("message")) out << "  " << v.at("message").get<std::string>() << "\n";
        if (v.contains("parameterization")) {
            const auto& p = v.at("parameterization");
            out << "  R1 =";
            for (const auto& r : p.at("R1")) out << " " << r.get<int>();
            out << ", R2 =";
            for (const auto& r : p.at("R2")) out << " " << r.get<int>();
            out << "\n";
            auto print_map = [&](const char* label, const json& arr) {
                out << "  " << label << ":";
                for (const auto& e : arr) out << " [" << e.get<std::string>() << "]";
                out << "\n";
            };
            print_map("F_x", p.at("F_x"));
            print_map("F_u", p.at("F_u"));
            print_map("F_g", p.at("F_g"));
        }
    }
    if (j.contains("ranks")) {
        const auto& r = j.at("ranks");
        out << "rank conditions (" << r.at("mode").get<std::string>() << "):\n";
        out << "  rank d_{y[-R1]}F_x = " << r.at("rank_d_y_minus_R1_Fx").get<std::size_t>()
            << ", rank d_{y[-R1]}F_g = " << r.at("rank_d_y_minus_R1_Fg").get<std::size_t>() << "\n";
        out << "  rank d_{y[R2-1]}F_x = " << r.at("rank_d_y_R2_minus_1_Fx").get<std::size_t>()
            << ", rank d_{y[R2]}F_u = " << r.at("rank_d_y_R2_Fu").get<std::size_t>() << "\n";
        out << "  equal-rank identity: " << (r.at("high_ranks_equal").get<bool>() ? "holds" : "violated")
            << ", forward pattern: " << (r.at("forward_pattern").get<bool>() ? "holds" : "no")
            << ", backward pattern: " << (r.at("backward_pattern").get<bool>() ? "holds" : "no") << "\n";
    }
    if (j.contains("trajectory")) {
        const auto& t = j.at("trajectory");
        if (t.contains("correspondence")) {
            const auto& c = t.at("correspondence");
            out << "trajectory correspondence: " << (c.at("pass").get<bool>() ? "pass" : "FAIL")
                << "  (N = " << c.at("N").get<std::size_t>() << ", seeds = "
                << c.at("seeds").get<std::size_t>() << ")\n";
        }
        if (t.contains("roundtrip")) {
            const auto& c = t.at("roundtrip");
            out << "parameterization round trip: " << (c.at("pass").get<bool>() ? "pass" : "FAIL")
                << "  (N = " << c.at("N").get<std::size_t>() << ", seeds = "
                << c.at("seeds").get<std::size_t>() << ")\n";
        }
    }
}

} // namespace

std::string render_human(const json& report) {
    std::ostringstream out;
    if (report.contains("system"))
        out << "system: " << report.at("system").at("name").get<std::string>() << "\n";
    if (report.contains("validation")) {
        const auto& v = report.at("validation");
        out << "validation: " << (v.at("ok").get<bool>() ? "ok" : "failed");
        if (v.contains("message")) out << " (" << v.at("message").get<std::string>() << ")";
        out << "\n";
    }
    if (report.contains("forward")) {
        out << "forward flatness test:\n";
        render_sequence(out, report.at("forward"), "  ");
    }
    if (report.contains("backward")) {
        const auto& b = report.at("backward");
        out << "backward flatness test:\n";
        out << "  verdict: " << b.at("verdict").get<std::string>() << "\n";
        if (b.contains("message")) out << "  " << b.at("message").get<std::string>() << "\n";
        if (b.contains("forward_record_on_associated")) {
            out << "  sequence on the associated system:\n";
            render_sequence(out, b.at("forward_record_on_associated"), "    ");
        }
        if (b.contains("derivation")) out << "  derivation: " << b.at("derivation").get<std::string>() << "\n";
    }
    render_outputs(out, report);
    if (report.contains("timings")) {
        out << "timings (ms):";
        for (const auto& [key, val] : report.at("timings").items())
            out << " " << key << "=" << val.get<double>();
        out << "\n";
    }
    return out.str();
}

} // namespace flatness
