#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "renalci/instances.hpp"
#include "renalci/manifest.hpp"
#include "renalci/raster.hpp"

namespace renalci {

/// Counts and areas a chronicity assessment needs for one slide or patient.
/// Cortex area is every non-Background pixel.
struct DiagnosticFeatures {
  std::uint64_t n_glom_total = 0;
  std::uint64_t n_glom_gs = 0;
  std::uint64_t n_glom_fc = 0;
  std::uint64_t area_tubule_total = 0;  // Tubule + TA
  std::uint64_t area_ta = 0;
  std::uint64_t area_cortex = 0;
  std::uint64_t area_if = 0;
  std::vector<std::string> slide_ids;

  /// Throws InputError when a count or area relation is violated.
  void validate() const;
  bool operator==(const DiagnosticFeatures&) const = default;
};

struct FeatureOptions {
  std::uint64_t min_area = 0;
  Connectivity connectivity = Connectivity::k8;
};

/// Area part of the features from a per-class pixel histogram.
void set_areas(DiagnosticFeatures& f, const ClassHistogram& histogram);
void set_glomerular_counts(DiagnosticFeatures& f, const GlomerularCounts& counts);

DiagnosticFeatures extract_features(const LabelRaster& raster, const FeatureOptions& opts = {},
                                    std::string slide_id = {});

/// Same result as extract_features() on the stitched slide, computed patch by
/// patch: per-patch labeling runs in parallel, components are merged across
/// borders, and areas are summed over the unpadded patch regions.
DiagnosticFeatures extract_features_tiled(const PatchGrid& grid,
                                          const std::vector<Patch<LabelRaster>>& patches,
                                          const FeatureOptions& opts = {},
                                          std::string slide_id = {}, unsigned jobs = 1);

/// Element-wise sum over slides. Throws InputError on an empty list.
DiagnosticFeatures aggregate_patient(std::span<const DiagnosticFeatures> per_slide);

struct StainedFeatures {
  Stain stain = Stain::kOther;
  DiagnosticFeatures features;
};

/// Glomerular counts pooled from silver slides, interstitial and tubular
/// areas pooled from trichrome slides. Throws InputError if either stain is
/// missing.
DiagnosticFeatures aggregate_by_stain(std::span<const StainedFeatures> per_slide);

}  // namespace renalci
