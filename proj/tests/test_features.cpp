#include <doctest.h>

#include <algorithm>
#include <random>

#include "renalci/error.hpp"
#include "renalci/features.hpp"
#include "renalci/pipeline.hpp"
#include "support.hpp"

using namespace renalci;

namespace {

void fill(LabelRaster& r, std::size_t top, std::size_t left, std::size_t h, std::size_t w,
          ClassId c) {
  for (std::size_t y = top; y < top + h; ++y) {
    for (std::size_t x = left; x < left + w; ++x) r.set(y, x, c);
  }
}

DiagnosticFeatures oracle_features(const LabelRaster& r, std::uint64_t min_area, bool eight) {
  DiagnosticFeatures f;
  const auto g = test::oracle_glom_counts(r, eight, min_area);
  f.n_glom_total = g.total;
  f.n_glom_gs = g.gs;
  f.n_glom_fc = g.fc;
  for (std::uint8_t v : r.data()) {
    const auto c = static_cast<ClassId>(v);
    if (c != ClassId::kBackground) ++f.area_cortex;
    if (c == ClassId::kTubule || c == ClassId::kTA) ++f.area_tubule_total;
    if (c == ClassId::kTA) ++f.area_ta;
    if (c == ClassId::kIF) ++f.area_if;
  }
  return f;
}

}  // namespace

TEST_CASE("hand-built raster features") {
  LabelRaster r(100, 100);
  fill(r, 0, 0, 10, 10, ClassId::kGlomerulus);  // 100
  fill(r, 0, 20, 8, 10, ClassId::kGS);          // 80
  fill(r, 20, 0, 10, 50, ClassId::kTubule);     // 500
  fill(r, 40, 0, 10, 20, ClassId::kTA);         // 200
  fill(r, 60, 0, 10, 30, ClassId::kIF);         // 300
  const auto f = extract_features(r);
  CHECK(f.n_glom_total == 2);
  CHECK(f.n_glom_gs == 1);
  CHECK(f.n_glom_fc == 0);
  CHECK(f.area_tubule_total == 700);
  CHECK(f.area_ta == 200);
  CHECK(f.area_cortex == 1180);
  CHECK(f.area_if == 300);
  CHECK(extract_features(LabelRaster(30, 30)) == DiagnosticFeatures{});
}

TEST_CASE("features match the oracle and are patch-size invariant") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 12; ++i) {
    const LabelRaster r = test::random_raster(rng, 100 + rng() % 400, 100 + rng() % 400, 60, 0.005);
    const std::uint64_t min_area = i % 3 == 0 ? 5 : 0;
    for (Connectivity conn : {Connectivity::k4, Connectivity::k8}) {
      FeatureOptions opts{min_area, conn};
      auto expected = oracle_features(r, min_area, conn == Connectivity::k8);
      expected.slide_ids = {"x"};
      const auto whole = extract_features(r, opts, "x");
      CHECK(whole == expected);
      for (std::size_t ps : {64, 100, 256, 1024}) {
        const auto t = tile(r, ps);
        CHECK(extract_features_tiled(t.grid, t.patches, opts, "x", 2) == whole);
        PipelineOptions po;
        po.patch_size = ps;
        po.features = opts;
        CHECK(features_from_raster(r, po, "x") == whole);
      }
    }
  }
}

TEST_CASE("features from overlapping masks") {
  LabelRaster truth(60, 40);
  fill(truth, 2, 2, 10, 10, ClassId::kGlomerulus);
  fill(truth, 4, 4, 5, 5, ClassId::kGS);
  fill(truth, 20, 20, 10, 30, ClassId::kTubule);
  fill(truth, 22, 22, 4, 4, ClassId::kTA);
  BinaryMask glom(60, 40), gs(60, 40), tub(60, 40), ta(60, 40);
  for (std::size_t y = 0; y < 40; ++y) {
    for (std::size_t x = 0; x < 60; ++x) {
      const ClassId c = truth.at(y, x);
      glom.set(y, x, c == ClassId::kGlomerulus || c == ClassId::kGS);
      gs.set(y, x, c == ClassId::kGS);
      tub.set(y, x, c == ClassId::kTubule || c == ClassId::kTA);
      ta.set(y, x, c == ClassId::kTA);
    }
  }
  const std::vector<MaskSource> src = {{ClassId::kGlomerulus, glom},
                                       {ClassId::kGS, gs},
                                       {ClassId::kTubule, tub},
                                       {ClassId::kTA, ta}};
  PipelineOptions po;
  po.patch_size = 16;
  CHECK(features_from_masks(60, 40, src, po, "m") == extract_features(truth, {}, "m"));
}

TEST_CASE("patient aggregation") {
  DiagnosticFeatures a{3, 1, 0, 10, 2, 40, 5, {"a"}};
  DiagnosticFeatures b{5, 0, 2, 20, 4, 60, 7, {"b"}};
  const std::vector<DiagnosticFeatures> ab = {a, b}, ba = {b, a};
  const auto s = aggregate_patient(ab);
  CHECK(s.n_glom_total == 8);
  CHECK(s.n_glom_gs == 1);
  CHECK(s.n_glom_fc == 2);
  CHECK(s.area_cortex == 100);
  CHECK(s.slide_ids == std::vector<std::string>{"a", "b"});
  auto t = aggregate_patient(ba);
  t.slide_ids = s.slide_ids;
  CHECK(t == s);
  const std::vector<DiagnosticFeatures> single = {a};
  CHECK(aggregate_patient(single) == a);
  CHECK_THROWS_AS(aggregate_patient(std::span<const DiagnosticFeatures>{}), InputError);
}

TEST_CASE("aggregation by stain") {
  DiagnosticFeatures silver{10, 2, 1, 100, 10, 500, 50, {"s"}};
  DiagnosticFeatures tri{7, 0, 0, 200, 80, 900, 300, {"t"}};
  const std::vector<StainedFeatures> both = {{Stain::kSilver, silver}, {Stain::kTrichrome, tri}};
  const auto f = aggregate_by_stain(both);
  CHECK(f.n_glom_total == 10);
  CHECK(f.n_glom_gs == 2);
  CHECK(f.area_tubule_total == 200);
  CHECK(f.area_ta == 80);
  CHECK(f.area_cortex == 900);
  CHECK(f.area_if == 300);
  const std::vector<StainedFeatures> only = {{Stain::kSilver, silver}};
  CHECK_THROWS_AS(aggregate_by_stain(only), InputError);
}

TEST_CASE("feature validation") {
  CHECK_THROWS_AS((DiagnosticFeatures{2, 2, 1, 0, 0, 0, 0, {}}.validate()), InputError);
  CHECK_THROWS_AS((DiagnosticFeatures{0, 0, 0, 5, 6, 10, 0, {}}.validate()), InputError);
  CHECK_THROWS_AS((DiagnosticFeatures{0, 0, 0, 0, 0, 10, 11, {}}.validate()), InputError);
}

TEST_CASE("adding a GS glomerulus never lowers the GS counts") {
  std::mt19937_64 rng(8);
  LabelRaster r = test::random_raster(rng, 200, 200, 30, 0.0);
  fill(r, 180, 180, 20, 20, ClassId::kBackground);
  const auto before = extract_features(r);
  fill(r, 185, 185, 10, 10, ClassId::kGS);
  const auto after = extract_features(r);
  CHECK(after.n_glom_gs >= before.n_glom_gs);
  CHECK(after.n_glom_total >= before.n_glom_total);
}
