#include "renalci/manifest.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "renalci/error.hpp"
#include "renalci/pgm.hpp"

namespace renalci {

using nlohmann::json;

std::string_view stain_name(Stain s) {
  switch (s) {
    case Stain::kSilver: return "silver";
    case Stain::kTrichrome: return "trichrome";
    case Stain::kOther: return "other";
  }
  return "other";
}

std::optional<Stain> parse_stain(std::string_view name) {
  if (name == "silver") return Stain::kSilver;
  if (name == "trichrome") return Stain::kTrichrome;
  if (name == "other") return Stain::kOther;
  return std::nullopt;
}

void SlideManifest::validate() const {
  grid.validate();
  std::vector<bool> seen(grid.patch_count(), false);
  for (const auto& p : patch_files) {
    if (p.row >= grid.rows || p.col >= grid.cols) {
      throw ManifestError(fmt::format("slide '{}': patch ({}, {}) lies outside the {}x{} grid",
                                      slide_id, p.row, p.col, grid.rows, grid.cols));
    }
    const std::size_t cell = p.row * grid.cols + p.col;
    if (seen[cell]) {
      throw ManifestError(
          fmt::format("slide '{}': duplicate patch at ({}, {})", slide_id, p.row, p.col));
    }
    seen[cell] = true;
  }
  auto missing = std::find(seen.begin(), seen.end(), false);
  if (missing != seen.end()) {
    const auto i = static_cast<std::size_t>(missing - seen.begin());
    throw ManifestError(fmt::format("slide '{}': missing patch at ({}, {})", slide_id,
                                    i / grid.cols, i % grid.cols));
  }
}

SlideManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

SlideManifest parse_manifest(std::string_view text, std::string_view context) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", context, e.what()));
  }
  SlideManifest m;
  try {
    m.slide_id = j.at("slide_id").get<std::string>();
    const auto stain = j.value("stain", std::string("other"));
    auto parsed = parse_stain(stain);
    if (!parsed) throw ManifestError(fmt::format("unknown stain '{}'", stain));
    m.stain = *parsed;
    m.grid.patch_size = j.at("patch_size").get<std::size_t>();
    m.grid.rows = j.at("rows").get<std::size_t>();
    m.grid.cols = j.at("cols").get<std::size_t>();
    m.grid.slide_width = j.at("slide_width").get<std::size_t>();
    m.grid.slide_height = j.at("slide_height").get<std::size_t>();
    for (const auto& p : j.at("patches")) {
      m.patch_files.push_back(PatchFile{p.at("row").get<std::size_t>(),
                                        p.at("col").get<std::size_t>(),
                                        p.at("path").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ManifestError(fmt::format("{}: {}", context, e.what()));
  }
  std::sort(m.patch_files.begin(), m.patch_files.end(), [](const auto& a, const auto& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  m.validate();
  return m;
}

std::string manifest_json(const SlideManifest& m) {
  json patches = json::array();
  for (const auto& p : m.patch_files) {
    patches.push_back({{"row", p.row}, {"col", p.col}, {"path", p.path}});
  }
  json j = {{"slide_id", m.slide_id},
            {"stain", stain_name(m.stain)},
            {"patch_size", m.grid.patch_size},
            {"rows", m.grid.rows},
            {"cols", m.grid.cols},
            {"slide_width", m.grid.slide_width},
            {"slide_height", m.grid.slide_height},
            {"patches", std::move(patches)}};
  return j.dump(2) + "\n";
}

void write_manifest(const SlideManifest& m, const std::filesystem::path& path) {
  write_file(path, manifest_json(m));
}

std::string patch_file_name(std::size_t row, std::size_t col) {
  return fmt::format("patch_r{}_c{}.pgm", row, col);
}

SlideManifest write_tiled_slide(const std::filesystem::path& dir, std::string slide_id,
                                Stain stain, const TiledImage<LabelRaster>& tiled,
                                unsigned jobs) {
  std::filesystem::create_directories(dir);
  SlideManifest m{std::move(slide_id), stain, tiled.grid, {}};
  m.patch_files.resize(tiled.patches.size());
  parallel_for(tiled.patches.size(), jobs, [&](std::size_t i) {
    const auto& p = tiled.patches[i];
    auto name = patch_file_name(p.row, p.col);
    write_raster(p.image, dir / name);
    m.patch_files[i] = PatchFile{p.row, p.col, std::move(name)};
  });
  m.validate();
  write_manifest(m, dir / "manifest.json");
  return m;
}

std::vector<Patch<LabelRaster>> load_patches(const SlideManifest& manifest,
                                             const std::filesystem::path& base_dir,
                                             unsigned jobs) {
  manifest.validate();
  std::vector<Patch<LabelRaster>> out(manifest.patch_files.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const auto& pf = manifest.patch_files[i];
    std::filesystem::path p(pf.path);
    if (p.is_relative()) p = base_dir / p;
    out[i] = Patch<LabelRaster>{pf.row, pf.col, read_raster(p)};
  });
  return out;
}

}  // namespace renalci
