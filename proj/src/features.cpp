#include "renalci/features.hpp"

#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"

namespace renalci {

void DiagnosticFeatures::validate() const {
  if (n_glom_gs + n_glom_fc > n_glom_total) {
    throw InputError(fmt::format("n_glom_gs + n_glom_fc ({} + {}) exceeds n_glom_total ({})",
                                 n_glom_gs, n_glom_fc, n_glom_total));
  }
  if (area_ta > area_tubule_total) {
    throw InputError(fmt::format("area_ta ({}) exceeds area_tubule_total ({})", area_ta,
                                 area_tubule_total));
  }
  if (area_if > area_cortex) {
    throw InputError(
        fmt::format("area_if ({}) exceeds area_cortex ({})", area_if, area_cortex));
  }
}

void set_areas(DiagnosticFeatures& f, const ClassHistogram& h) {
  f.area_ta = h[code(ClassId::kTA)];
  f.area_tubule_total = h[code(ClassId::kTubule)] + f.area_ta;
  f.area_if = h[code(ClassId::kIF)];
  f.area_cortex = 0;
  for (ClassId c : kForegroundClasses) f.area_cortex += h[code(c)];
}

void set_glomerular_counts(DiagnosticFeatures& f, const GlomerularCounts& counts) {
  f.n_glom_total = counts.n_total;
  f.n_glom_gs = counts.n_gs;
  f.n_glom_fc = counts.n_fc;
}

DiagnosticFeatures extract_features(const LabelRaster& raster, const FeatureOptions& opts,
                                    std::string slide_id) {
  DiagnosticFeatures f;
  set_glomerular_counts(f, classify_glomerular_instances(raster, opts.min_area, opts.connectivity));
  set_areas(f, raster.histogram());
  if (!slide_id.empty()) f.slide_ids.push_back(std::move(slide_id));
  return f;
}

DiagnosticFeatures extract_features_tiled(const PatchGrid& grid,
                                          const std::vector<Patch<LabelRaster>>& patches,
                                          const FeatureOptions& opts, std::string slide_id,
                                          unsigned jobs) {
  grid.validate();
  std::vector<PatchInstances> per_patch(patches.size());
  std::vector<ClassHistogram> histograms(patches.size());
  parallel_for(patches.size(), jobs, [&](std::size_t i) {
    const auto& p = patches[i];
    if (p.row >= grid.rows || p.col >= grid.cols) {
      throw ManifestError(fmt::format("patch ({}, {}) lies outside the grid", p.row, p.col));
    }
    per_patch[i] = PatchInstances{
        p.row, p.col, connected_components(p.image, ClassSet::glomerular(), opts.connectivity)};
    // Padding is Background, so only the valid region can hold tissue; count
    // it alone so stray padding content cannot leak into areas.
    ClassHistogram h{};
    const std::size_t w = std::min(grid.valid_width(p.col), p.image.width());
    const std::size_t rows = std::min(grid.valid_height(p.row), p.image.height());
    for (std::size_t y = 0; y < rows; ++y) {
      for (std::uint8_t v : p.image.row(y).first(w)) ++h[v];
    }
    histograms[i] = h;
  });

  const InstanceSet merged = merge_cross_patch(per_patch, grid, opts.connectivity);
  ClassHistogram total{};
  for (const auto& h : histograms) {
    for (std::size_t k = 0; k < kNumClasses; ++k) total[k] += h[k];
  }

  DiagnosticFeatures f;
  set_glomerular_counts(f, classify_glomerular(merged, opts.min_area));
  set_areas(f, total);
  if (!slide_id.empty()) f.slide_ids.push_back(std::move(slide_id));
  return f;
}

namespace {

void add_counts(DiagnosticFeatures& into, const DiagnosticFeatures& f) {
  into.n_glom_total += f.n_glom_total;
  into.n_glom_gs += f.n_glom_gs;
  into.n_glom_fc += f.n_glom_fc;
}

void add_areas(DiagnosticFeatures& into, const DiagnosticFeatures& f) {
  into.area_tubule_total += f.area_tubule_total;
  into.area_ta += f.area_ta;
  into.area_cortex += f.area_cortex;
  into.area_if += f.area_if;
}

}  // namespace

DiagnosticFeatures aggregate_patient(std::span<const DiagnosticFeatures> per_slide) {
  if (per_slide.empty()) throw InputError("cannot aggregate an empty slide list");
  DiagnosticFeatures out;
  for (const auto& f : per_slide) {
    add_counts(out, f);
    add_areas(out, f);
    out.slide_ids.insert(out.slide_ids.end(), f.slide_ids.begin(), f.slide_ids.end());
  }
  return out;
}

DiagnosticFeatures aggregate_by_stain(std::span<const StainedFeatures> per_slide) {
  if (per_slide.empty()) throw InputError("cannot aggregate an empty slide list");
  DiagnosticFeatures out;
  bool have_silver = false;
  bool have_trichrome = false;
  for (const auto& s : per_slide) {
    if (s.stain == Stain::kSilver) {
      add_counts(out, s.features);
      have_silver = true;
    } else if (s.stain == Stain::kTrichrome) {
      add_areas(out, s.features);
      have_trichrome = true;
    } else {
      continue;
    }
    out.slide_ids.insert(out.slide_ids.end(), s.features.slide_ids.begin(),
                         s.features.slide_ids.end());
  }
  if (!have_silver) throw InputError("stain-specific aggregation needs a silver slide");
  if (!have_trichrome) throw InputError("stain-specific aggregation needs a trichrome slide");
  return out;
}

}  // namespace renalci
