#include "renalci/pgm.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "renalci/error.hpp"

namespace renalci {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_whitespace_and_comments();
    const char* first = bytes_.data() + pos_;
    const char* last = bytes_.data() + bytes_.size();
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) {
      throw ParseError(fmt::format("PGM header: expected {} at byte {}", what, pos_));
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_whitespace() const {
    return pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]));
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.empty()) throw ParseError("PGM: empty input");
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ParseError("PGM: missing P5 magic number");
  }
  HeaderReader header(bytes.substr(2));
  GrayImage img;
  img.width = header.number("width");
  img.height = header.number("height");
  const std::size_t maxval = header.number("maxval");
  if (maxval == 0 || maxval > 255) {
    throw ParseError(fmt::format("PGM: unsupported maxval {} (8-bit only)", maxval));
  }
  img.maxval = static_cast<unsigned>(maxval);
  if (!header.at_whitespace()) throw ParseError("PGM: missing separator after maxval");
  header.advance();

  const std::size_t offset = 2 + header.pos();
  const std::size_t expected = img.width * img.height;
  if (img.width == 0 || img.height == 0) {
    throw ParseError(fmt::format("PGM: zero dimension {}x{}", img.width, img.height));
  }
  if (bytes.size() - offset < expected) {
    throw ParseError(fmt::format("PGM: truncated pixel data ({} of {} bytes)",
                                 bytes.size() - offset, expected));
  }
  if (bytes.size() - offset > expected) {
    throw ParseError(fmt::format("PGM: {} trailing bytes after pixel data",
                                 bytes.size() - offset - expected));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return img;
}

std::string encode_pgm(std::size_t width, std::size_t height,
                       std::span<const std::uint8_t> pixels) {
  std::string out = fmt::format("P5\n{} {}\n255\n", width, height);
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

LabelRaster parse_raster(std::string_view bytes, std::string_view context) {
  GrayImage img;
  try {
    img = decode_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", context, e.what()));
  }
  try {
    return LabelRaster(img.width, img.height, std::move(img.pixels));
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", context, e.what()));
  }
}

LabelRaster read_raster(const std::filesystem::path& path) {
  return parse_raster(read_file(path), path.string());
}

void write_raster(const LabelRaster& raster, const std::filesystem::path& path) {
  write_file(path, encode_pgm(raster.width(), raster.height(), raster.data()));
}

BinaryMask parse_mask(std::string_view bytes, std::string_view context) {
  GrayImage img;
  try {
    img = decode_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", context, e.what()));
  }
  return BinaryMask(img.width, img.height, std::move(img.pixels));
}

BinaryMask read_mask(const std::filesystem::path& path) {
  return parse_mask(read_file(path), path.string());
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(mask.size());
  auto bits = mask.data();
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = bits[i] ? 255 : 0;
  write_file(path, encode_pgm(mask.width(), mask.height(), gray));
}

}  // namespace renalci
