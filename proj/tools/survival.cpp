// survival km | logrank | cox | auc

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "common.hpp"
#include "renalci/cox.hpp"
#include "renalci/csv.hpp"
#include "renalci/error.hpp"

namespace renalci::cli {

namespace {

struct Stratum {
  std::string label;
  std::vector<SurvivalRecord> records;
};

/// Distinct values of `column`, or bins between ascending `cuts` when given.
std::vector<Stratum> stratify(const Cohort& cohort, const std::string& column,
                              const std::vector<double>& cuts) {
  if (!std::is_sorted(cuts.begin(), cuts.end()) ||
      std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) {
    throw ConfigError("--cuts must be strictly increasing");
  }
  const std::size_t k = cohort.covariate_index(column);
  std::vector<Stratum> out;
  if (cuts.empty()) {
    std::map<double, std::vector<SurvivalRecord>> groups;
    for (const auto& r : cohort.records) groups[r.covariates[k]].push_back(r);
    for (auto& [v, recs] : groups) out.push_back({format_double(v), std::move(recs)});
    return out;
  }
  out.resize(cuts.size() + 1);
  out.front().label = fmt::format("<{}", format_double(cuts.front()));
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    out[i].label = fmt::format("[{},{})", format_double(cuts[i - 1]), format_double(cuts[i]));
  }
  out.back().label = fmt::format(">={}", format_double(cuts.back()));
  for (const auto& r : cohort.records) {
    const auto bin = static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), r.covariates[k]) - cuts.begin());
    out[bin].records.push_back(r);
  }
  std::erase_if(out, [](const Stratum& s) { return s.records.empty(); });
  return out;
}

LogRankResult logrank_of(const std::vector<Stratum>& strata) {
  std::vector<std::vector<SurvivalRecord>> groups;
  for (const auto& s : strata) groups.push_back(s.records);
  return logrank(groups);
}

Json strata_labels(const std::vector<Stratum>& strata) {
  Json j = Json::array();
  for (const auto& s : strata) j.push_back(s.label);
  return j;
}

struct StrataOpts {
  std::string cohort, strata;
  std::vector<double> cuts;
};

void add_strata_options(CLI::App* cmd, StrataOpts& o, bool strata_required) {
  cmd->add_option("--cohort", o.cohort, "Cohort CSV (subject_id,time_years,event,covariates...)")
      ->required();
  auto* s = cmd->add_option("--strata", o.strata, "Covariate column defining groups");
  if (strata_required) s->required();
  cmd->add_option("--cuts", o.cuts, "Ascending cut points binning the strata column")
      ->delimiter(',');
}

CoxOptions cox_options(const std::string& ties, double tol, int max_iter, double level) {
  CoxOptions co;
  co.ties = parse_tie_method(ties);
  co.tol = tol;
  co.max_iter = max_iter;
  co.level = level;
  return co;
}

}  // namespace

void add_survival_commands(CLI::App& app, Globals& g, int&) {
  auto* surv = app.add_subcommand("survival", "Kaplan-Meier, log-rank, Cox and AUC analyses");
  surv->require_subcommand(1);

  // km
  {
    auto* cmd = surv->add_subcommand("km", "Kaplan-Meier curves, optionally per stratum");
    auto o = std::make_shared<StrataOpts>();
    auto level = std::make_shared<double>(0.95);
    add_strata_options(cmd, *o, false);
    cmd->add_option("--level", *level, "Confidence level")->capture_default_str();
    cmd->callback([o, level, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("survival km");
      const Cohort cohort = parse_cohort_csv(prov.read(o->cohort));
      std::vector<Stratum> strata;
      if (o->strata.empty()) {
        strata.push_back({"all", cohort.records});
      } else {
        strata = stratify(cohort, o->strata, o->cuts);
      }

      Json curves = Json::array();
      std::string csv = "stratum,time,survival,ci_low,ci_high,at_risk,events,censored\n";
      for (const auto& s : strata) {
        const KMEstimate km = km_estimate(s.records, *level);
        curves.push_back(Json{{"stratum", s.label}, {"n", s.records.size()}, {"km", to_json(km)}});
        for (const auto& p : km.points) {
          csv += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(s.label), format_double(p.time),
                             format_double(p.survival), format_double(p.ci_low),
                             format_double(p.ci_high), p.at_risk, p.events, p.censored);
        }
      }
      Json result;
      result["curves"] = std::move(curves);
      if (strata.size() >= 2) result["logrank"] = to_json(logrank_of(strata));

      prov.config()["cohort"] = o->cohort;
      prov.config()["strata"] = o->strata;
      prov.config()["cuts"] = o->cuts;
      prov.config()["level"] = *level;
      Outputs out;
      out.add(dir / "km.json", report(prov, g.seed, std::move(result)));
      out.add(dir / "km_points.csv", csv);
      out.commit();
    });
  }

  // logrank
  {
    auto* cmd = surv->add_subcommand("logrank", "Log-rank test across strata");
    auto o = std::make_shared<StrataOpts>();
    add_strata_options(cmd, *o, true);
    cmd->callback([o, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("survival logrank");
      const Cohort cohort = parse_cohort_csv(prov.read(o->cohort));
      const auto strata = stratify(cohort, o->strata, o->cuts);
      Json result = to_json(logrank_of(strata));
      result["strata"] = strata_labels(strata);
      prov.config()["cohort"] = o->cohort;
      prov.config()["strata"] = o->strata;
      prov.config()["cuts"] = o->cuts;
      Outputs out;
      out.add(dir / "logrank.json", report(prov, g.seed, std::move(result)));
      out.commit();
    });
  }

  // cox
  {
    auto* cmd = surv->add_subcommand("cox", "Cox proportional-hazards regression");
    struct Opts {
      std::string cohort, ties = "efron";
      std::vector<std::string> covariates;
      double tol = 1e-9, level = 0.95;
      int max_iter = 50;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--cohort", o->cohort, "Cohort CSV")->required();
    cmd->add_option("--covariates", o->covariates, "Covariates to fit (default: all)")
        ->delimiter(',');
    cmd->add_option("--ties", o->ties, "efron or breslow")->capture_default_str();
    cmd->add_option("--tol", o->tol, "Gradient max-norm tolerance")->capture_default_str();
    cmd->add_option("--max-iter", o->max_iter, "Newton iterations")->capture_default_str();
    cmd->add_option("--level", o->level, "Confidence level")->capture_default_str();
    cmd->callback([o, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("survival cox");
      Cohort cohort = parse_cohort_csv(prov.read(o->cohort));
      if (!o->covariates.empty()) cohort = select_covariates(cohort, o->covariates);
      const CoxFit fit = cox_fit(cohort.records, cohort.covariate_names,
                                 cox_options(o->ties, o->tol, o->max_iter, o->level));
      prov.config()["cohort"] = o->cohort;
      prov.config()["covariates"] = cohort.covariate_names;
      prov.config()["ties"] = o->ties;
      prov.config()["tol"] = o->tol;
      prov.config()["max_iter"] = o->max_iter;
      prov.config()["level"] = o->level;
      Outputs out;
      out.add(dir / "cox.json", report(prov, g.seed, to_json(fit)));
      out.commit();
    });
  }

  // auc
  {
    auto* cmd = surv->add_subcommand("auc", "Outcome discrimination of a risk score");
    struct Opts {
      std::string cohort, score, ties = "efron";
      std::vector<std::string> cox;
      double horizon = 0.0, level = 0.95;
      std::size_t resamples = 2000;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--cohort", o->cohort, "Cohort CSV")->required();
    auto* score = cmd->add_option("--score", o->score, "Covariate column used as the risk score");
    auto* cox = cmd->add_option("--cox", o->cox, "Covariates of a Cox model whose linear "
                                                  "predictor is the risk score")
                    ->delimiter(',');
    score->excludes(cox);
    cmd->add_option("--ties", o->ties, "Tie method for --cox")->capture_default_str();
    cmd->add_option("--horizon", o->horizon,
                    "Positive = event by this time; negative = followed beyond it; "
                    "subjects censored earlier are dropped (default: event indicator)");
    cmd->add_option("--resamples", o->resamples, "Bootstrap resamples")->capture_default_str();
    cmd->add_option("--level", o->level, "Confidence level")->capture_default_str();
    cmd->callback([o, &g] {
      const fs::path dir = out_dir(g);
      if (o->score.empty() == o->cox.empty()) {
        throw ConfigError("survival auc: give exactly one of --score or --cox");
      }
      Provenance prov("survival auc");
      const Cohort cohort = parse_cohort_csv(prov.read(o->cohort));

      std::vector<double> scores;
      Json model = nullptr;
      if (!o->score.empty()) {
        scores = cohort.covariate(o->score);
      } else {
        const Cohort sub = select_covariates(cohort, o->cox);
        const CoxFit fit = cox_fit(sub.records, sub.covariate_names,
                                   cox_options(o->ties, 1e-9, 50, o->level));
        scores = linear_predictor(fit, sub.records);
        model = to_json(fit);
      }

      std::vector<double> kept;
      std::vector<bool> labels;
      std::size_t dropped = 0;
      for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        const auto& r = cohort.records[i];
        if (o->horizon > 0.0) {
          if (r.event && r.time <= o->horizon) {
            labels.push_back(true);
          } else if (r.time > o->horizon) {
            labels.push_back(false);
          } else {
            ++dropped;
            continue;
          }
        } else {
          labels.push_back(r.event);
        }
        kept.push_back(scores[i]);
      }
      BootstrapOptions bo;
      bo.level = o->level;
      bo.n_resamples = o->resamples;
      bo.seed = g.seed;
      bo.jobs = g.jobs;
      Json result = to_json(auc_with_ci(kept, labels, bo));
      result["n_dropped"] = dropped;
      if (!model.is_null()) result["model"] = std::move(model);

      prov.config()["cohort"] = o->cohort;
      prov.config()["score"] = o->score;
      prov.config()["cox"] = o->cox;
      prov.config()["ties"] = o->ties;
      prov.config()["horizon"] = o->horizon;
      prov.config()["resamples"] = o->resamples;
      prov.config()["level"] = o->level;
      Outputs out;
      out.add(dir / "auc.json", report(prov, g.seed, std::move(result)));
      out.commit();
    });
  }
}

}  // namespace renalci::cli
