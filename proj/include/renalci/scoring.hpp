#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "renalci/features.hpp"

namespace renalci {

/// The four chronicity parameters.
enum class Parameter { kGS = 0, kFC = 1, kIF = 2, kTA = 3 };

inline constexpr std::array<Parameter, 4> kParameters = {Parameter::kGS, Parameter::kFC,
                                                         Parameter::kIF, Parameter::kTA};

/// "gs", "fc", "if", "ta".
std::string_view parameter_key(Parameter p);
std::optional<Parameter> parse_parameter(std::string_view key);

/// Fractions in [0, 1], indexed by Parameter.
struct ProportionParams {
  std::array<double, 4> values{};

  double operator[](Parameter p) const { return values[static_cast<std::size_t>(p)]; }
  double& operator[](Parameter p) { return values[static_cast<std::size_t>(p)]; }
  bool operator==(const ProportionParams&) const = default;
};

/// p_gs = GS/glomeruli, p_fc = FC/glomeruli, p_if = IF/cortex,
/// p_ta = TA/tubules. A zero denominator raises InsufficientTissueError
/// naming every affected parameter.
ProportionParams proportions(const DiagnosticFeatures& f);

/// One bin: p maps here if p < upto, or p == upto when inclusive.
struct Breakpoint {
  double upto = 1.0;
  int score = 0;
  bool inclusive = true;

  bool operator==(const Breakpoint&) const = default;
};

/// Per-parameter bin tables mapping a proportion to an integer sub-score.
struct ScoringRule {
  std::string name;
  std::array<std::vector<Breakpoint>, 4> breakpoints;

  const std::vector<Breakpoint>& table(Parameter p) const {
    return breakpoints[static_cast<std::size_t>(p)];
  }

  /// Bounds strictly increasing, scores non-decreasing, last bin ends at an
  /// inclusive 1.0. Throws ConfigError.
  void validate() const;

  /// 0 for p = 0; 1 for p < 0.25; 2 for 0.25 <= p <= 0.50; 3 above.
  static ScoringRule conventional();
  /// Demonstration only, not a published rule: 0 for p = 0, then 1..5 for
  /// each 10-point bin up to 0.50 inclusive, 6 above.
  static ScoringRule nuanced_example();
  /// "conventional" or "nuanced-example"; nullopt otherwise.
  static std::optional<ScoringRule> builtin(std::string_view name);

  bool operator==(const ScoringRule&) const = default;
};

/// Score of the first bin containing p. Throws ConfigError for an invalid
/// rule and InputError for p outside [0, 1].
int subscore(double p, const ScoringRule& rule, Parameter parameter);

struct SubScores {
  std::array<int, 4> values{};

  int operator[](Parameter p) const { return values[static_cast<std::size_t>(p)]; }
  int& operator[](Parameter p) { return values[static_cast<std::size_t>(p)]; }
  bool operator==(const SubScores&) const = default;
};

int chronicity(const SubScores& s);

struct ChronicityResult {
  ProportionParams proportions;
  SubScores sub_scores;
  int total = 0;
  std::string rule_name;

  bool operator==(const ChronicityResult&) const = default;
};

ChronicityResult score_proportions(const ProportionParams& p, const ScoringRule& rule);
ChronicityResult score_patient(const DiagnosticFeatures& f, const ScoringRule& rule);

}  // namespace renalci
