#pragma once

// JSON forms of the report and configuration types. Non-finite numbers are
// written as null.

#include <json.hpp>

#include "renalci/cox.hpp"
#include "renalci/features.hpp"
#include "renalci/fusion.hpp"
#include "renalci/metrics.hpp"
#include "renalci/scoring.hpp"
#include "renalci/survival.hpp"
#include "renalci/synth.hpp"

namespace renalci {

using Json = nlohmann::ordered_json;

Json to_json(const DiagnosticFeatures& f);
/// Throws ConfigError on missing or mistyped fields.
DiagnosticFeatures features_from_json(const Json& j);

Json to_json(const ProportionParams& p);
Json to_json(const SubScores& s);
Json to_json(const ChronicityResult& r);

/// {"name": ..., "breakpoints": {"gs": [{"upto": 0.25, "score": 1,
/// "inclusive": false}, ...], "fc": ..., "if": ..., "ta": ...}}.
/// "inclusive" defaults to true. The result is validated.
Json to_json(const ScoringRule& rule);
ScoringRule rule_from_json(const Json& j);

Json to_json(const FusionReport& r);
Json to_json(const Interval& i);
Json to_json(const DiceReport& r);
Json to_json(const SpearmanResult& r);
Json to_json(const KMEstimate& km);
Json to_json(const LogRankResult& r);
Json to_json(const CoxFit& fit);
Json to_json(const AucResult& r);

/// Unknown keys are rejected; missing keys keep their defaults.
Json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const Json& j);
Json to_json(const CohortSpec& s);
CohortSpec cohort_spec_from_json(const Json& j);

/// Parses JSON text, turning syntax errors into ParseError.
Json parse_json(std::string_view text, std::string_view context);

}  // namespace renalci
