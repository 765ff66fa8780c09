#include "renalci/serialize.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "renalci/error.hpp"

namespace renalci {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// Typed access to one JSON object that remembers which keys were read, so
/// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", context_));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(fmt::format("{}: missing '{}'", context_, key));
    return j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = as<T>(key, get(key));
  }

  template <class T>
  T require(const std::string& key) {
    return as<T>(key, get(key));
  }

  void reject_unknown() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(fmt::format("{}: unknown key '{}'", context_, item.key()));
      }
    }
  }

  const std::string& context() const { return context_; }

 private:
  template <class T>
  T as(const std::string& key, const Json& v) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw type_error(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw type_error(key, "an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
          v.get<std::int64_t>() < 0) {
        throw type_error(key, "a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw type_error(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw type_error(key, "a string");
    }
    try {
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(fmt::format("{}: '{}': {}", context_, key, e.what()));
    }
  }

  ConfigError type_error(const std::string& key, const char* what) const {
    return ConfigError(fmt::format("{}: '{}' must be {}", context_, key, what));
  }

  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace

Json parse_json(std::string_view text, std::string_view context) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", context, e.what()));
  }
}

Json to_json(const DiagnosticFeatures& f) {
  Json j;
  j["n_glom_total"] = f.n_glom_total;
  j["n_glom_gs"] = f.n_glom_gs;
  j["n_glom_fc"] = f.n_glom_fc;
  j["area_tubule_total"] = f.area_tubule_total;
  j["area_ta"] = f.area_ta;
  j["area_cortex"] = f.area_cortex;
  j["area_if"] = f.area_if;
  j["slide_ids"] = f.slide_ids;
  return j;
}

DiagnosticFeatures features_from_json(const Json& j) {
  Fields in(j, "features");
  DiagnosticFeatures f;
  f.n_glom_total = in.require<std::uint64_t>("n_glom_total");
  f.n_glom_gs = in.require<std::uint64_t>("n_glom_gs");
  f.n_glom_fc = in.require<std::uint64_t>("n_glom_fc");
  f.area_tubule_total = in.require<std::uint64_t>("area_tubule_total");
  f.area_ta = in.require<std::uint64_t>("area_ta");
  f.area_cortex = in.require<std::uint64_t>("area_cortex");
  f.area_if = in.require<std::uint64_t>("area_if");
  in.read("slide_ids", f.slide_ids);
  in.reject_unknown();
  return f;
}

Json to_json(const ProportionParams& p) {
  Json j;
  for (Parameter k : kParameters) j[std::string("p_") + std::string(parameter_key(k))] = p[k];
  return j;
}

Json to_json(const SubScores& s) {
  Json j;
  for (Parameter k : kParameters) j[std::string(parameter_key(k))] = s[k];
  return j;
}

Json to_json(const ChronicityResult& r) {
  Json j;
  j["rule"] = r.rule_name;
  j["proportions"] = to_json(r.proportions);
  j["sub_scores"] = to_json(r.sub_scores);
  j["chronicity_index"] = r.total;
  return j;
}

Json to_json(const ScoringRule& rule) {
  Json j;
  j["name"] = rule.name;
  Json bp = Json::object();
  for (Parameter p : kParameters) {
    Json bins = Json::array();
    for (const auto& b : rule.table(p)) {
      bins.push_back(Json{{"upto", b.upto}, {"score", b.score}, {"inclusive", b.inclusive}});
    }
    bp[std::string(parameter_key(p))] = std::move(bins);
  }
  j["breakpoints"] = std::move(bp);
  return j;
}

ScoringRule rule_from_json(const Json& j) {
  Fields in(j, "scoring rule");
  ScoringRule rule;
  rule.name = in.require<std::string>("name");
  Fields tables(in.get("breakpoints"), fmt::format("scoring rule '{}' breakpoints", rule.name));
  for (Parameter p : kParameters) {
    const std::string key(parameter_key(p));
    const Json& bins = tables.get(key);
    if (!bins.is_array()) {
      throw ConfigError(fmt::format("scoring rule '{}': '{}' must be an array", rule.name, key));
    }
    auto& out = rule.breakpoints[static_cast<std::size_t>(p)];
    for (const auto& b : bins) {
      Fields bin(b, fmt::format("scoring rule '{}' {} bin", rule.name, key));
      Breakpoint bp;
      bp.upto = bin.require<double>("upto");
      bp.score = bin.require<int>("score");
      bin.read("inclusive", bp.inclusive);
      bin.reject_unknown();
      out.push_back(bp);
    }
  }
  tables.reject_unknown();
  in.reject_unknown();
  rule.validate();
  return rule;
}

Json to_json(const FusionReport& r) {
  Json j;
  Json counts;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    counts[std::string(class_name(static_cast<ClassId>(c)))] = r.class_counts[c];
  }
  j["class_counts"] = std::move(counts);
  Json overlaps = Json::array();
  for (const auto& o : r.overlaps) {
    overlaps.push_back(Json{{"winner", class_name(o.winner)},
                            {"loser", class_name(o.loser)},
                            {"pixels", o.pixels}});
  }
  j["overlaps"] = std::move(overlaps);
  j["overlap_pixels"] = r.overlap_pixels;
  j["inconsistent_pixels"] = r.inconsistent_pixels;
  return j;
}

Json to_json(const Interval& i) { return Json{{"low", num(i.low)}, {"high", num(i.high)}}; }

Json to_json(const DiceReport& r) {
  Json j;
  Json classes = Json::array();
  for (const auto& c : r.per_class) {
    classes.push_back(Json{{"class", class_name(c.cls)},
                           {"dice", num(c.dice)},
                           {"ci", to_json(c.ci)},
                           {"n_images", c.n_images},
                           {"both_empty", c.both_empty}});
  }
  j["per_class"] = std::move(classes);
  j["average"] = num(r.average);
  return j;
}

Json to_json(const SpearmanResult& r) {
  return Json{{"rho", num(r.rho)},
              {"p_value", num(r.p_value)},
              {"p_method", r.exact ? "exact permutation" : "t approximation"}};
}

Json to_json(const KMEstimate& km) {
  Json j;
  Json points = Json::array();
  for (const auto& p : km.points) {
    points.push_back(Json{{"time", p.time},
                          {"survival", p.survival},
                          {"at_risk", p.at_risk},
                          {"events", p.events},
                          {"censored", p.censored},
                          {"greenwood_se", num(p.greenwood_se)},
                          {"ci_low", num(p.ci_low)},
                          {"ci_high", num(p.ci_high)}});
  }
  j["points"] = std::move(points);
  j["median_survival"] = km.median ? Json(*km.median) : Json(nullptr);
  return j;
}

Json to_json(const LogRankResult& r) {
  return Json{{"chi_square", num(r.chi_square)},
              {"df", r.df},
              {"p_value", num(r.p_value)},
              {"observed", r.observed},
              {"expected", r.expected}};
}

Json to_json(const CoxFit& fit) {
  Json j;
  Json coefs = Json::array();
  for (const auto& c : fit.coefficients) {
    coefs.push_back(Json{{"name", c.name},
                         {"beta", num(c.beta)},
                         {"hazard_ratio", num(c.hazard_ratio)},
                         {"se", num(c.se)},
                         {"wald_z", num(c.z)},
                         {"p_value", num(c.p_value)},
                         {"ci_low", num(c.ci_low)},
                         {"ci_high", num(c.ci_high)},
                         {"estimable", c.estimable}});
  }
  j["coefficients"] = std::move(coefs);
  j["ties"] = tie_method_name(fit.ties);
  j["n"] = fit.n;
  j["n_events"] = fit.n_events;
  j["log_likelihood"] = num(fit.log_likelihood);
  j["null_log_likelihood"] = num(fit.null_log_likelihood);
  j["likelihood_ratio"] = Json{
      {"statistic", num(fit.lr_statistic)}, {"df", fit.lr_df}, {"p_value", num(fit.lr_p_value)}};
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

Json to_json(const AucResult& r) {
  return Json{{"auc", num(r.auc)},
              {"ci", to_json(r.ci)},
              {"n_positive", r.n_positive},
              {"n_negative", r.n_negative}};
}

Json to_json(const SynthSpec& s) {
  Json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["n_glomeruli"] = s.n_glomeruli;
  j["n_gs"] = s.n_gs;
  j["n_fc"] = s.n_fc;
  j["n_tubules"] = s.n_tubules;
  j["p_if"] = s.p_if;
  j["p_ta"] = s.p_ta;
  j["glom_radius_min"] = s.glom_radius_min;
  j["glom_radius_max"] = s.glom_radius_max;
  j["rect_min"] = s.rect_min;
  j["rect_max"] = s.rect_max;
  j["max_attempts"] = s.max_attempts;
  j["seed"] = s.seed;
  return j;
}

SynthSpec synth_spec_from_json(const Json& j) {
  Fields in(j, "synth spec");
  SynthSpec s;
  in.read("width", s.width);
  in.read("height", s.height);
  in.read("n_glomeruli", s.n_glomeruli);
  in.read("n_gs", s.n_gs);
  in.read("n_fc", s.n_fc);
  in.read("n_tubules", s.n_tubules);
  in.read("p_if", s.p_if);
  in.read("p_ta", s.p_ta);
  in.read("glom_radius_min", s.glom_radius_min);
  in.read("glom_radius_max", s.glom_radius_max);
  in.read("rect_min", s.rect_min);
  in.read("rect_max", s.rect_max);
  in.read("max_attempts", s.max_attempts);
  in.read("seed", s.seed);
  in.reject_unknown();
  s.validate();
  return s;
}

Json to_json(const CohortSpec& s) {
  Json j;
  j["n"] = s.n;
  j["baseline_hazard"] = s.baseline_hazard;
  j["censor_max"] = s.censor_max;
  j["admin_time"] = s.admin_time;
  j["seed"] = s.seed;
  Json covs = Json::array();
  for (const auto& c : s.covariates) {
    Json cj;
    cj["name"] = c.name;
    cj["kind"] = covariate_kind_name(c.kind);
    switch (c.kind) {
      case CovariateKind::kBinary:
        cj["p"] = c.p;
        break;
      case CovariateKind::kNormal:
        cj["mean"] = c.mean;
        cj["sd"] = c.sd;
        break;
      case CovariateKind::kCategorical:
        cj["level_probs"] = c.level_probs;
        break;
    }
    cj["beta"] = c.beta;
    covs.push_back(std::move(cj));
  }
  j["covariates"] = std::move(covs);
  return j;
}

CohortSpec cohort_spec_from_json(const Json& j) {
  Fields in(j, "cohort spec");
  CohortSpec s;
  in.read("n", s.n);
  in.read("baseline_hazard", s.baseline_hazard);
  in.read("censor_max", s.censor_max);
  in.read("admin_time", s.admin_time);
  in.read("seed", s.seed);
  if (in.has("covariates")) {
    const Json& covs = in.get("covariates");
    if (!covs.is_array()) throw ConfigError("cohort spec: 'covariates' must be an array");
    for (const auto& cj : covs) {
      Fields c(cj, "cohort spec covariate");
      CovariateSpec cov;
      cov.name = c.require<std::string>("name");
      cov.kind = parse_covariate_kind(c.require<std::string>("kind"));
      c.read("p", cov.p);
      c.read("mean", cov.mean);
      c.read("sd", cov.sd);
      c.read("level_probs", cov.level_probs);
      c.read("beta", cov.beta);
      c.reject_unknown();
      s.covariates.push_back(std::move(cov));
    }
  }
  in.reject_unknown();
  s.validate();
  return s;
}

}  // namespace renalci
