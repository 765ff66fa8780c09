#include "renalci/pipeline.hpp"

#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"

namespace renalci {

TiledImage<LabelRaster> fuse_tiled(std::size_t width, std::size_t height,
                                   std::span<const MaskSource> sources,
                                   const PipelineOptions& opts) {
  const PatchGrid grid = PatchGrid::for_slide(width, height, opts.patch_size);
  for (const auto& s : sources) {
    if (s.mask.width() != width || s.mask.height() != height) {
      throw ShapeError(fmt::format("{} mask is {}x{}, expected {}x{}", class_name(s.cls),
                                   s.mask.width(), s.mask.height(), width, height));
    }
  }

  std::vector<TiledImage<BinaryMask>> tiled_masks;
  tiled_masks.reserve(sources.size());
  for (const auto& s : sources) tiled_masks.push_back(tile(s.mask, opts.patch_size, opts.jobs));

  TiledImage<LabelRaster> out{grid, std::vector<Patch<LabelRaster>>(grid.patch_count())};
  parallel_for(grid.patch_count(), opts.jobs, [&](std::size_t i) {
    std::vector<MaskSource> local;
    local.reserve(sources.size());
    for (std::size_t k = 0; k < sources.size(); ++k) {
      local.push_back(MaskSource{sources[k].cls, tiled_masks[k].patches[i].image});
    }
    out.patches[i] = Patch<LabelRaster>{i / grid.cols, i % grid.cols,
                                        fuse(grid.patch_size, grid.patch_size, local, opts.order)};
  });
  return out;
}

DiagnosticFeatures features_from_masks(std::size_t width, std::size_t height,
                                       std::span<const MaskSource> sources,
                                       const PipelineOptions& opts, std::string slide_id) {
  const auto tiled = fuse_tiled(width, height, sources, opts);
  return extract_features_tiled(tiled.grid, tiled.patches, opts.features, std::move(slide_id),
                                opts.jobs);
}

DiagnosticFeatures features_from_raster(const LabelRaster& raster, const PipelineOptions& opts,
                                        std::string slide_id) {
  const auto tiled = tile(raster, opts.patch_size, opts.jobs);
  return extract_features_tiled(tiled.grid, tiled.patches, opts.features, std::move(slide_id),
                                opts.jobs);
}

}  // namespace renalci
