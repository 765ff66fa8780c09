#pragma once

// Binary PGM (P5) I/O. Label rasters store class codes directly as gray
// values; masks are written as 0/255.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "renalci/fileio.hpp"
#include "renalci/raster.hpp"

namespace renalci {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<std::uint8_t> pixels;
};

/// Parses a P5 byte stream. Header comments are accepted; 16-bit images are
/// rejected. Throws ParseError.
GrayImage decode_pgm(std::string_view bytes);
std::string encode_pgm(std::size_t width, std::size_t height,
                       std::span<const std::uint8_t> pixels);

/// Decodes a label raster from PGM bytes; `context` prefixes error messages.
LabelRaster parse_raster(std::string_view bytes, std::string_view context);
LabelRaster read_raster(const std::filesystem::path& path);
void write_raster(const LabelRaster& raster, const std::filesystem::path& path);

/// Any nonzero gray value is foreground.
BinaryMask parse_mask(std::string_view bytes, std::string_view context);
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace renalci
