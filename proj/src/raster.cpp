#include "renalci/raster.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "renalci/error.hpp"

namespace renalci {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Background", "Glomerulus", "Tubule", "GS", "FC", "IF", "TA"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view class_name(ClassId c) { return kClassNames.at(code(c)); }

std::optional<ClassId> parse_class(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (iequals(name, kClassNames[i])) return static_cast<ClassId>(i);
  }
  return std::nullopt;
}

LabelRaster::LabelRaster(std::size_t width, std::size_t height)
    : width_(width), height_(height), data_(width * height, 0) {}

LabelRaster::LabelRaster(std::size_t width, std::size_t height,
                         std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw DimensionError(fmt::format("label raster data has {} values, expected {}x{}={}",
                                     data_.size(), width_, height_, width_ * height_));
  }
  auto bad = std::find_if(data_.begin(), data_.end(),
                          [](std::uint8_t v) { return v > kMaxClassCode; });
  if (bad != data_.end()) {
    const auto index = static_cast<std::size_t>(bad - data_.begin());
    throw FormatError(fmt::format("invalid class code {} at pixel index {} (row {}, col {})",
                                  *bad, index, index / width_, index % width_));
  }
}

ClassHistogram LabelRaster::histogram() const {
  ClassHistogram h{};
  for (std::uint8_t v : data_) ++h[v];
  return h;
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height)
    : width_(width), height_(height), data_(width * height, 0) {}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw DimensionError(fmt::format("mask data has {} values, expected {}x{}={}",
                                     data_.size(), width_, height_, width_ * height_));
  }
  for (auto& v : data_) v = v != 0 ? 1 : 0;
}

std::uint64_t BinaryMask::count() const {
  return static_cast<std::uint64_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask mask_of(const LabelRaster& raster, ClassId c) {
  std::vector<std::uint8_t> bits(raster.size());
  const auto src = raster.data();
  const std::uint8_t want = code(c);
  std::transform(src.begin(), src.end(), bits.begin(),
                 [want](std::uint8_t v) { return static_cast<std::uint8_t>(v == want); });
  return BinaryMask(raster.width(), raster.height(), std::move(bits));
}

}  // namespace renalci
