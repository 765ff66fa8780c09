#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "renalci/raster.hpp"

namespace renalci {

/// Foreground classes ordered from highest to lowest precedence. When masks
/// overlap, the pixel takes the highest-precedence class covering it.
class PrecedenceOrder {
 public:
  /// GS > FC > TA > IF > Glomerulus > Tubule: lesions override the
  /// compartments they occur in.
  PrecedenceOrder();
  /// Throws ConfigError unless `order` lists each foreground class once.
  explicit PrecedenceOrder(std::vector<ClassId> order);
  static PrecedenceOrder from_names(const std::vector<std::string>& names);

  /// 0 is the highest precedence.
  std::size_t rank(ClassId c) const { return rank_[code(c)]; }
  const std::vector<ClassId>& classes() const { return order_; }

 private:
  std::vector<ClassId> order_;
  std::array<std::size_t, kNumClasses> rank_{};
};

struct MaskSource {
  ClassId cls = ClassId::kBackground;
  BinaryMask mask;
};

/// Combines binary class masks into one label raster. Pixels covered by no
/// mask are Background. Throws ShapeError on a dimension mismatch and
/// ConfigError for a Background source.
LabelRaster fuse(std::size_t width, std::size_t height, std::span<const MaskSource> sources,
                 const PrecedenceOrder& order = {}, unsigned jobs = 1);

struct OverlapCount {
  ClassId winner;
  ClassId loser;
  std::uint64_t pixels = 0;
};

struct FusionReport {
  ClassHistogram class_counts{};
  /// Per (winner, loser) pair, pixels where both masks were set and the
  /// winner took the pixel. Ordered by winner rank, then loser rank.
  std::vector<OverlapCount> overlaps;
  /// Pixels covered by more than one distinct class.
  std::uint64_t overlap_pixels = 0;
  /// Pixels whose label differs from what the sources and order imply.
  std::uint64_t inconsistent_pixels = 0;

  std::uint64_t resolved(ClassId winner, ClassId loser) const;
};

FusionReport validate_fusion(const LabelRaster& raster, std::span<const MaskSource> sources,
                             const PrecedenceOrder& order = {});

}  // namespace renalci
