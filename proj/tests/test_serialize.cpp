#include <doctest.h>

#include <cmath>
#include <limits>

#include "renalci/error.hpp"
#include "renalci/manifest.hpp"
#include "renalci/serialize.hpp"
#include "renalci/tiling.hpp"

using namespace renalci;

TEST_CASE("features round trip") {
  const DiagnosticFeatures f{12, 3, 1, 5000, 700, 20000, 1500, {"a", "b"}};
  const Json j = to_json(f);
  CHECK(j["n_glom_gs"] == 3);
  CHECK(features_from_json(j) == f);
  CHECK(features_from_json(parse_json(j.dump(), "mem")) == f);

  Json bad = j;
  bad["n_glom_total"] = "twelve";
  CHECK_THROWS_AS(features_from_json(bad), ConfigError);
  bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(features_from_json(bad), ConfigError);
}

TEST_CASE("chronicity result layout") {
  const DiagnosticFeatures f{10, 3, 0, 100, 60, 1000, 400, {}};
  const Json j = to_json(score_patient(f, ScoringRule::conventional()));
  CHECK(j["chronicity_index"] == 7);
  CHECK(j["rule"] == "conventional");
  CHECK(j["sub_scores"]["ta"] == 3);
  CHECK(j["proportions"]["p_gs"].get<double>() == 0.3);
}

TEST_CASE("synth and cohort specs round trip") {
  SynthSpec s;
  s.width = 777;
  s.p_if = 0.35;
  s.seed = 12;
  CHECK(synth_spec_from_json(to_json(s)) == s);
  CHECK(synth_spec_from_json(Json::parse(R"({"n_gs": 2})")).n_gs == 2);
  CHECK_THROWS_AS(synth_spec_from_json(Json::parse(R"({"n_gls": 2})")), ConfigError);
  CHECK_THROWS_AS(synth_spec_from_json(Json::parse(R"({"width": -3})")), ConfigError);

  CohortSpec c;
  c.n = 50;
  c.covariates = {{"x", CovariateKind::kBinary, 0.3, 0, 1, {}, 0.7},
                  {"g", CovariateKind::kCategorical, 0.5, 0, 1, {0.5, 0.5}, -0.2}};
  c.admin_time = 10;
  CHECK(cohort_spec_from_json(to_json(c)) == c);
}

TEST_CASE("non-finite numbers become null") {
  CoxFit fit;
  CoxCoefficient k;
  k.name = "flat";
  k.se = std::numeric_limits<double>::infinity();
  k.ci_high = std::numeric_limits<double>::infinity();
  k.estimable = false;
  fit.coefficients.push_back(k);
  const Json j = to_json(fit);
  const std::string text = j.dump();
  CHECK(text.find("inf") == std::string::npos);
  CHECK(text.find("nan") == std::string::npos);
  CHECK(j["coefficients"][0]["se"].is_null());
}

TEST_CASE("manifest text round trip") {
  const auto t = tile(LabelRaster(300, 200), 128);
  SlideManifest m;
  m.slide_id = "s9";
  m.stain = Stain::kTrichrome;
  m.grid = t.grid;
  for (const auto& p : t.patches) m.patch_files.push_back({p.row, p.col, patch_file_name(p.row, p.col)});
  const std::string text = manifest_json(m);
  CHECK(parse_manifest(text, "mem") == m);
  CHECK(manifest_json(parse_manifest(text, "mem")) == text);
  CHECK(patch_file_name(2, 11) == "patch_r2_c11.pgm");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_json("{\"a\": ", "x"), ParseError);
  CHECK_NOTHROW(parse_json("[1, 2]", "x"));
}
