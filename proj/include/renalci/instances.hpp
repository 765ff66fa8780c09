#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "renalci/raster.hpp"
#include "renalci/tiling.hpp"

namespace renalci {

enum class Connectivity { k4 = 4, k8 = 8 };

/// Parses 4 or 8; anything else is a ConfigError.
Connectivity connectivity_from_int(int n);

struct BoundingBox {
  std::size_t min_row = 0;
  std::size_t min_col = 0;
  std::size_t max_row = 0;
  std::size_t max_col = 0;

  bool operator==(const BoundingBox&) const = default;
};

/// One connected component.
struct Instance {
  std::uint32_t id = 0;
  ClassId cls = ClassId::kBackground;  // majority class, severity tie-break
  std::uint64_t area = 0;
  BoundingBox bbox;
  ClassHistogram histogram{};
  // First pixel in raster scan order; ids follow this order.
  std::size_t first_row = 0;
  std::size_t first_col = 0;

  bool operator==(const Instance&) const = default;
};

/// Instance ids along the four edges of a labeled image (0 = no instance).
/// This is all cross-patch merging needs, so full label images never have to
/// be kept around.
struct BorderLabels {
  std::vector<std::uint32_t> top, bottom, left, right;

  bool operator==(const BorderLabels&) const = default;
};

struct InstanceSet {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Instance> instances;  // ids 1..n in order
  BorderLabels border;

  std::uint64_t total_area() const;
  bool operator==(const InstanceSet&) const = default;
};

/// Majority class of a histogram. Ties go to the more severe class:
/// GS > FC > TA > IF > Glomerulus > Tubule > Background.
ClassId majority_class(const ClassHistogram& histogram);

/// Maximal connected sets of pixels whose class lies in `group`. Throws
/// ConfigError if the group is empty or contains Background.
InstanceSet connected_components(const LabelRaster& raster, const ClassSet& group,
                                 Connectivity connectivity = Connectivity::k8);

struct PatchInstances {
  std::size_t row = 0;
  std::size_t col = 0;
  InstanceSet set;
};

/// Unites per-patch components that touch across patch borders. The result
/// equals connected_components() on the stitched slide. Throws ManifestError
/// when the patches do not cover `grid` exactly once or have the wrong size.
InstanceSet merge_cross_patch(const std::vector<PatchInstances>& patches,
                              const PatchGrid& grid,
                              Connectivity connectivity = Connectivity::k8);

struct GlomerularCounts {
  std::uint64_t n_total = 0;
  std::uint64_t n_gs = 0;
  std::uint64_t n_fc = 0;
  std::uint64_t n_normal = 0;

  bool operator==(const GlomerularCounts&) const = default;
};

/// Counts glomerular instances of at least `min_area` pixels, labeling each
/// by its majority class among Glomerulus/GS/FC (ties: GS > FC > Glomerulus).
GlomerularCounts classify_glomerular(const InstanceSet& set, std::uint64_t min_area = 0);

GlomerularCounts classify_glomerular_instances(const LabelRaster& raster,
                                               std::uint64_t min_area = 0,
                                               Connectivity connectivity = Connectivity::k8);

/// id,class,area,min_row,min_col,max_row,max_col
void write_instances_csv(const InstanceSet& set, std::ostream& out);

}  // namespace renalci
