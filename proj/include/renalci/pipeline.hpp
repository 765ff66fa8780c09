#pragma once

// Slide-level composition of tiling, fusion, instance merging and feature
// extraction, processed patch by patch.

#include <span>
#include <string>

#include "renalci/features.hpp"
#include "renalci/fusion.hpp"
#include "renalci/tiling.hpp"

namespace renalci {

struct PipelineOptions {
  std::size_t patch_size = kDefaultPatchSize;
  FeatureOptions features;
  PrecedenceOrder order;
  unsigned jobs = 1;
};

/// Tiles every mask, then fuses each patch independently.
TiledImage<LabelRaster> fuse_tiled(std::size_t width, std::size_t height,
                                   std::span<const MaskSource> sources,
                                   const PipelineOptions& opts);

/// tile -> fuse -> instances -> features.
DiagnosticFeatures features_from_masks(std::size_t width, std::size_t height,
                                       std::span<const MaskSource> sources,
                                       const PipelineOptions& opts, std::string slide_id = {});

/// tile -> instances -> features.
DiagnosticFeatures features_from_raster(const LabelRaster& raster, const PipelineOptions& opts,
                                        std::string slide_id = {});

}  // namespace renalci
