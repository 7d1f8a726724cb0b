#pragma once

// Machine-readable reports (JSON, key order fixed, no timestamps) and the
// human-readable summary tables printed next to them.

#include <string>

#include "json.hpp"

#include "zeroone/feller.hpp"
#include "zeroone/law.hpp"
#include "zeroone/mc.hpp"
#include "zeroone/quad.hpp"
#include "zeroone/timechange.hpp"

namespace zeroone::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Finite values as numbers; inf, -inf and nan as strings.
Json number(double v);

Json to_json(const quad::IntegrabilityVerdict& v);
Json to_json(const feller::ValidationReport& v);
Json to_json(const feller::ExplosionReport& e);
Json to_json(const law::EventStructure& e);
Json to_json(const law::ZeroOneVerdict& v);
Json to_json(const law::BoundaryReport& r);
Json to_json(const mc::EventFrequencies& f);
Json to_json(const mc::VerificationSummary& s);
/// One path-dump record; fields in the order seed, exit, exit_time, censored,
/// failed, failure, clamp_count, one_sided_increments, times, states, phi.
Json to_json(const timechange::PathRecord& p);

/// Two-space indented document with a trailing newline.
std::string serialize(const Json& j);

std::string summary(const feller::ValidationReport& v);
std::string summary(const law::BoundaryReport& r);
std::string summary(const mc::VerificationSummary& s, const std::string& title);

}  // namespace zeroone::report
