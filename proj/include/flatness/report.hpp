#pragma once

#include "flatness/backward.hpp"
#include "flatness/jacobian.hpp"

#include "json.hpp"

namespace flatness {

inline constexpr const char* kToolName = "flatcheck";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

nlohmann::json report_skeleton(std::uint64_t seed);
nlohmann::json sequence_to_json(const SequenceRecord& rec);
nlohmann::json candidate_to_json(const FlatOutputCandidate& cand);
nlohmann::json parameterization_to_json(const Parameterization& p);
nlohmann::json rank_report_to_json(const RankReport& rep);

/// Human-readable rendering of a report object; the JSON is the single
/// source of truth for both output modes.
std::string render_human(const nlohmann::json& report);

} // namespace flatness
