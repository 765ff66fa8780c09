#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"
#include "renalci/raster.hpp"

namespace renalci {

inline constexpr std::size_t kDefaultPatchSize = 1024;

/// Non-overlapping grid of square patches covering a slide. Edge patches
/// extend past the slide and are padded with zeros (Background).
struct PatchGrid {
  std::size_t patch_size = kDefaultPatchSize;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t slide_width = 0;
  std::size_t slide_height = 0;

  static PatchGrid for_slide(std::size_t width, std::size_t height, std::size_t patch_size);

  std::size_t patch_count() const { return rows * cols; }
  /// Width of the slide region covered by patch column `col`.
  std::size_t valid_width(std::size_t col) const {
    return std::min(patch_size, slide_width - col * patch_size);
  }
  std::size_t valid_height(std::size_t row) const {
    return std::min(patch_size, slide_height - row * patch_size);
  }
  /// Throws ManifestError when rows/cols disagree with the slide extent.
  void validate() const;

  bool operator==(const PatchGrid&) const = default;
};

template <class Image>
struct Patch {
  std::size_t row = 0;
  std::size_t col = 0;
  Image image;
};

template <class Image>
struct TiledImage {
  PatchGrid grid;
  std::vector<Patch<Image>> patches;  // sorted by (row, col)
};

inline PatchGrid PatchGrid::for_slide(std::size_t width, std::size_t height,
                                      std::size_t patch_size) {
  if (width == 0 || height == 0) {
    throw DimensionError(fmt::format("cannot tile a {}x{} raster", width, height));
  }
  if (patch_size == 0) throw DimensionError("patch size must be at least 1");
  return PatchGrid{patch_size, (height + patch_size - 1) / patch_size,
                   (width + patch_size - 1) / patch_size, width, height};
}

inline void PatchGrid::validate() const {
  if (patch_size == 0 || slide_width == 0 || slide_height == 0) {
    throw ManifestError("patch grid has a zero dimension");
  }
  const auto expected = for_slide(slide_width, slide_height, patch_size);
  if (expected.rows != rows || expected.cols != cols) {
    throw ManifestError(fmt::format(
        "grid {}x{} does not match slide {}x{} at patch size {} (expected {}x{})", rows,
        cols, slide_width, slide_height, patch_size, expected.rows, expected.cols));
  }
}

/// Cuts `image` into patch_size x patch_size patches, zero-padding the edges.
template <class Image>
TiledImage<Image> tile(const Image& image, std::size_t patch_size, unsigned jobs = 1) {
  TiledImage<Image> out{PatchGrid::for_slide(image.width(), image.height(), patch_size), {}};
  const PatchGrid& grid = out.grid;
  out.patches.resize(grid.patch_count());
  parallel_for(grid.patch_count(), jobs, [&](std::size_t i) {
    const std::size_t r = i / grid.cols;
    const std::size_t c = i % grid.cols;
    Image patch(patch_size, patch_size);
    const std::size_t w = grid.valid_width(c);
    const std::size_t h = grid.valid_height(r);
    for (std::size_t y = 0; y < h; ++y) {
      auto src = image.row(r * patch_size + y).subspan(c * patch_size, w);
      std::copy(src.begin(), src.end(), patch.mutable_row(y).begin());
    }
    out.patches[i] = Patch<Image>{r, c, std::move(patch)};
  });
  return out;
}

/// Inverse of tile(): reassembles the slide, discarding padding. Every grid
/// cell must be supplied exactly once.
template <class Image>
Image stitch(const PatchGrid& grid, const std::vector<Patch<Image>>& patches) {
  grid.validate();
  std::vector<const Patch<Image>*> slot(grid.patch_count(), nullptr);
  for (const auto& p : patches) {
    if (p.row >= grid.rows || p.col >= grid.cols) {
      throw ManifestError(fmt::format("patch ({}, {}) lies outside the {}x{} grid", p.row,
                                      p.col, grid.rows, grid.cols));
    }
    auto& s = slot[p.row * grid.cols + p.col];
    if (s != nullptr) {
      throw ManifestError(fmt::format("duplicate patch at ({}, {})", p.row, p.col));
    }
    if (p.image.width() != grid.patch_size || p.image.height() != grid.patch_size) {
      throw ManifestError(fmt::format("patch ({}, {}) is {}x{}, expected {}x{}", p.row, p.col,
                                      p.image.width(), p.image.height(), grid.patch_size,
                                      grid.patch_size));
    }
    s = &p;
  }
  for (std::size_t i = 0; i < slot.size(); ++i) {
    if (slot[i] == nullptr) {
      throw ManifestError(
          fmt::format("missing patch at ({}, {})", i / grid.cols, i % grid.cols));
    }
  }

  Image out(grid.slide_width, grid.slide_height);
  for (std::size_t i = 0; i < slot.size(); ++i) {
    const std::size_t r = i / grid.cols;
    const std::size_t c = i % grid.cols;
    const std::size_t w = grid.valid_width(c);
    for (std::size_t y = 0; y < grid.valid_height(r); ++y) {
      auto src = slot[i]->image.row(y).first(w);
      auto dst = out.mutable_row(r * grid.patch_size + y).subspan(c * grid.patch_size, w);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

}  // namespace renalci
