#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "renalci/raster.hpp"
#include "renalci/tiling.hpp"

namespace renalci {

enum class Stain { kSilver, kTrichrome, kOther };

std::string_view stain_name(Stain s);
std::optional<Stain> parse_stain(std::string_view name);

struct PatchFile {
  std::size_t row = 0;
  std::size_t col = 0;
  std::string path;  // relative to the manifest's directory unless absolute

  bool operator==(const PatchFile&) const = default;
};

/// A tiled slide on disk.
struct SlideManifest {
  std::string slide_id;
  Stain stain = Stain::kOther;
  PatchGrid grid;
  std::vector<PatchFile> patch_files;  // sorted by (row, col)

  /// Throws ManifestError unless patch_files covers every grid cell once.
  void validate() const;

  bool operator==(const SlideManifest&) const = default;
};

SlideManifest read_manifest(const std::filesystem::path& path);
/// `context` prefixes error messages.
SlideManifest parse_manifest(std::string_view text, std::string_view context);
std::string manifest_json(const SlideManifest& manifest);
void write_manifest(const SlideManifest& manifest, const std::filesystem::path& path);

/// patch_r<row>_c<col>.pgm
std::string patch_file_name(std::size_t row, std::size_t col);

/// Writes each patch as patch_r<row>_c<col>.pgm plus manifest.json into
/// `dir` (created if needed) and returns the manifest.
SlideManifest write_tiled_slide(const std::filesystem::path& dir, std::string slide_id,
                                Stain stain, const TiledImage<LabelRaster>& tiled,
                                unsigned jobs = 1);

/// Reads every patch the manifest lists. Relative paths resolve against
/// `base_dir`.
std::vector<Patch<LabelRaster>> load_patches(const SlideManifest& manifest,
                                             const std::filesystem::path& base_dir,
                                             unsigned jobs = 1);

}  // namespace renalci
