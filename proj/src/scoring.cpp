#include "renalci/scoring.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "renalci/error.hpp"

namespace renalci {

std::string_view parameter_key(Parameter p) {
  switch (p) {
    case Parameter::kGS: return "gs";
    case Parameter::kFC: return "fc";
    case Parameter::kIF: return "if";
    case Parameter::kTA: return "ta";
  }
  return "?";
}

std::optional<Parameter> parse_parameter(std::string_view key) {
  for (Parameter p : kParameters) {
    if (parameter_key(p) == key) return p;
  }
  return std::nullopt;
}

ProportionParams proportions(const DiagnosticFeatures& f) {
  f.validate();
  std::vector<std::string> missing;
  if (f.n_glom_total == 0) {
    missing.emplace_back("p_gs");
    missing.emplace_back("p_fc");
  }
  if (f.area_cortex == 0) missing.emplace_back("p_if");
  if (f.area_tubule_total == 0) missing.emplace_back("p_ta");
  if (!missing.empty()) {
    throw InsufficientTissueError(
        fmt::format("insufficient tissue: zero denominator for {}", fmt::join(missing, ", ")));
  }

  ProportionParams p;
  const auto glom = static_cast<double>(f.n_glom_total);
  p[Parameter::kGS] = static_cast<double>(f.n_glom_gs) / glom;
  p[Parameter::kFC] = static_cast<double>(f.n_glom_fc) / glom;
  p[Parameter::kIF] = static_cast<double>(f.area_if) / static_cast<double>(f.area_cortex);
  p[Parameter::kTA] =
      static_cast<double>(f.area_ta) / static_cast<double>(f.area_tubule_total);
  return p;
}

void ScoringRule::validate() const {
  for (Parameter p : kParameters) {
    const auto& bins = table(p);
    const auto key = parameter_key(p);
    if (bins.empty()) throw ConfigError(fmt::format("rule '{}': no bins for {}", name, key));
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (!std::isfinite(bins[i].upto) || bins[i].upto < 0.0 || bins[i].upto > 1.0) {
        throw ConfigError(fmt::format("rule '{}': {} bin {} bound {} outside [0, 1]", name, key,
                                      i, bins[i].upto));
      }
      if (i > 0 && !(bins[i].upto > bins[i - 1].upto)) {
        throw ConfigError(
            fmt::format("rule '{}': {} bounds are not strictly increasing at bin {}", name, key, i));
      }
      if (i > 0 && bins[i].score < bins[i - 1].score) {
        throw ConfigError(
            fmt::format("rule '{}': {} scores decrease at bin {}", name, key, i));
      }
    }
    if (bins.back().upto != 1.0 || !bins.back().inclusive) {
      throw ConfigError(
          fmt::format("rule '{}': last {} bin must end at an inclusive 1.0", name, key));
    }
  }
}

namespace {

ScoringRule uniform_rule(std::string name, const std::vector<Breakpoint>& bins) {
  ScoringRule rule;
  rule.name = std::move(name);
  rule.breakpoints.fill(bins);
  return rule;
}

}  // namespace

ScoringRule ScoringRule::conventional() {
  return uniform_rule("conventional", {{0.0, 0, true},
                                       {0.25, 1, false},
                                       {0.50, 2, true},
                                       {1.0, 3, true}});
}

ScoringRule ScoringRule::nuanced_example() {
  return uniform_rule("nuanced-example", {{0.0, 0, true},
                                          {0.10, 1, true},
                                          {0.20, 2, true},
                                          {0.30, 3, true},
                                          {0.40, 4, true},
                                          {0.50, 5, true},
                                          {1.0, 6, true}});
}

std::optional<ScoringRule> ScoringRule::builtin(std::string_view name) {
  if (name == "conventional") return conventional();
  if (name == "nuanced-example") return nuanced_example();
  return std::nullopt;
}

int subscore(double p, const ScoringRule& rule, Parameter parameter) {
  rule.validate();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError(fmt::format("proportion {} for {} is outside [0, 1]", p,
                                 parameter_key(parameter)));
  }
  for (const auto& bin : rule.table(parameter)) {
    if (p < bin.upto || (bin.inclusive && p == bin.upto)) return bin.score;
  }
  // Unreachable for a validated rule: the last bin is [.., 1.0].
  throw ConfigError(fmt::format("rule '{}' has no bin for {}", rule.name, p));
}

int chronicity(const SubScores& s) { return std::accumulate(s.values.begin(), s.values.end(), 0); }

ChronicityResult score_proportions(const ProportionParams& p, const ScoringRule& rule) {
  ChronicityResult r;
  r.proportions = p;
  for (Parameter param : kParameters) r.sub_scores[param] = subscore(p[param], rule, param);
  r.total = chronicity(r.sub_scores);
  r.rule_name = rule.name;
  return r;
}

ChronicityResult score_patient(const DiagnosticFeatures& f, const ScoringRule& rule) {
  return score_proportions(proportions(f), rule);
}

}  // namespace renalci
