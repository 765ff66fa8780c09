#include <doctest.h>

#include <cmath>

#include "renalci/error.hpp"
#include "renalci/features.hpp"
#include "renalci/fusion.hpp"
#include "renalci/pipeline.hpp"
#include "renalci/scoring.hpp"
#include "renalci/synth.hpp"

using namespace renalci;

TEST_CASE("painted features equal extracted features") {
  SynthSpec spec;
  spec.width = 600;
  spec.height = 500;
  spec.n_glomeruli = 10;
  spec.n_gs = 3;
  spec.n_fc = 1;
  spec.n_tubules = 20;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    spec.seed = seed;
    const auto s = generate_slide(spec, "s");
    CHECK(s.features.n_glom_total == 10);
    CHECK(s.features.n_glom_gs == 3);
    CHECK(s.features.n_glom_fc == 1);
    CHECK(extract_features(s.raster, {}, "s") == s.features);
    CHECK(extract_features(s.raster, {0, Connectivity::k4}, "s") == s.features);
    PipelineOptions po;
    po.patch_size = 128;
    CHECK(features_from_raster(s.raster, po, "s") == s.features);
    CHECK(score_patient(s.features, ScoringRule::conventional()) == s.truth);
  }
}

TEST_CASE("generator is deterministic in the seed") {
  SynthSpec spec;
  spec.width = spec.height = 400;
  spec.n_glomeruli = 6;
  spec.n_gs = 1;
  spec.n_fc = 1;
  spec.n_tubules = 10;
  spec.seed = 99;
  const auto a = generate_slide(spec);
  const auto b = generate_slide(spec);
  CHECK(a.raster == b.raster);
  spec.seed = 100;
  CHECK_FALSE(generate_slide(spec).raster == a.raster);
}

TEST_CASE("target proportions reach the intended sub-scores") {
  SynthSpec spec;
  spec.width = spec.height = 1200;
  spec.n_glomeruli = 10;
  spec.n_gs = 3;
  spec.n_fc = 0;
  spec.p_if = 0.4;
  spec.p_ta = 0.6;
  spec.seed = 5;
  const auto s = generate_slide(spec);
  const auto& p = s.truth.proportions;
  CHECK(p[Parameter::kGS] == 0.3);
  CHECK(p[Parameter::kFC] == 0.0);
  CHECK(std::abs(p[Parameter::kIF] - 0.4) < 0.02);
  CHECK(std::abs(p[Parameter::kTA] - 0.6) < 0.1);
  CHECK(s.truth.sub_scores == SubScores{{2, 0, 2, 3}});
  CHECK(s.truth.total == 7);
}

TEST_CASE("model masks fuse back to the raster") {
  SynthSpec spec;
  spec.width = 500;
  spec.height = 450;
  spec.n_glomeruli = 8;
  spec.n_gs = 2;
  spec.n_fc = 2;
  spec.n_tubules = 15;
  spec.seed = 3;
  const auto s = generate_slide(spec);
  const auto masks = model_masks(s.raster);
  CHECK(fuse(500, 450, masks) == s.raster);
  PipelineOptions po;
  po.patch_size = 100;
  CHECK(features_from_masks(500, 450, masks, po, "synth") == s.features);
}

TEST_CASE("spec validation and capacity") {
  SynthSpec spec;
  spec.n_gs = 15;
  spec.n_fc = 10;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = {};
  spec.p_if = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = {};
  spec.glom_radius_min = 40;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = {};
  spec.width = spec.height = 80;
  spec.n_glomeruli = 30;
  spec.n_gs = spec.n_fc = 0;
  spec.max_attempts = 50;
  CHECK_THROWS_AS(generate_slide(spec), CapacityError);
}

TEST_CASE("cohort generation") {
  CohortSpec spec;
  spec.n = 300;
  spec.covariates = {{"x", CovariateKind::kBinary, 0.5, 0, 1, {}, std::log(2.0)},
                     {"z", CovariateKind::kNormal, 0.5, 1.0, 2.0, {}, 0.0},
                     {"g", CovariateKind::kCategorical, 0.5, 0, 1, {0.2, 0.3, 0.5}, 0.1}};
  spec.censor_max = 15;
  spec.admin_time = 12;
  spec.seed = 4;
  const Cohort a = generate_cohort(spec, 1);
  CHECK(generate_cohort(spec, 4) == a);
  CHECK(a.covariate_names == std::vector<std::string>{"x", "z", "g"});
  REQUIRE(a.records.size() == 300);
  CHECK(a.records[0].subject_id == "S001");
  for (const auto& r : a.records) {
    CHECK(r.time > 0);
    CHECK(r.time <= 12);
    CHECK((r.covariates[0] == 0.0 || r.covariates[0] == 1.0));
    CHECK((r.covariates[2] == 0.0 || r.covariates[2] == 1.0 || r.covariates[2] == 2.0));
  }
  spec.seed = 5;
  CHECK_FALSE(generate_cohort(spec) == a);

  spec.covariates[2].level_probs = {0.5, -0.1};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.covariates[2].level_probs = {1.0};
  spec.baseline_hazard = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(parse_covariate_kind("ordinal"), ConfigError);
}
