#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace renalci {

/// Segmentation classes as stored in label rasters. Background is the
/// implicit seventh value for pixels no model claims.
enum class ClassId : std::uint8_t {
  kBackground = 0,
  kGlomerulus = 1,
  kTubule = 2,
  kGS = 3,  // globally sclerotic glomerulus
  kFC = 4,  // fibrous crescent
  kIF = 5,  // interstitial fibrosis
  kTA = 6,  // tubular atrophy
};

inline constexpr std::size_t kNumClasses = 7;
inline constexpr std::uint8_t kMaxClassCode = 6;

constexpr std::uint8_t code(ClassId c) { return static_cast<std::uint8_t>(c); }

inline constexpr std::array<ClassId, 6> kForegroundClasses = {
    ClassId::kGlomerulus, ClassId::kTubule, ClassId::kGS,
    ClassId::kFC,         ClassId::kIF,     ClassId::kTA};

std::string_view class_name(ClassId c);
/// Accepts the names printed by class_name, case-insensitively.
std::optional<ClassId> parse_class(std::string_view name);

using ClassHistogram = std::array<std::uint64_t, kNumClasses>;

/// Small set of class ids.
class ClassSet {
 public:
  ClassSet() = default;
  ClassSet(std::initializer_list<ClassId> classes) {
    for (ClassId c : classes) insert(c);
  }

  void insert(ClassId c) { bits_.set(code(c)); }
  bool contains(ClassId c) const { return bits_.test(code(c)); }
  bool contains_code(std::uint8_t v) const { return v < kNumClasses && bits_.test(v); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }
  bool operator==(const ClassSet&) const = default;

  static ClassSet glomerular() {
    return {ClassId::kGlomerulus, ClassId::kGS, ClassId::kFC};
  }

 private:
  std::bitset<kNumClasses> bits_;
};

/// Row-major 8-bit grid of class codes. Every value is a valid ClassId.
class LabelRaster {
 public:
  LabelRaster() = default;
  /// All-Background raster.
  LabelRaster(std::size_t width, std::size_t height);
  /// Throws FormatError naming the first pixel whose code exceeds 6.
  LabelRaster(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  ClassId at(std::size_t row, std::size_t col) const {
    return static_cast<ClassId>(data_[row * width_ + col]);
  }
  void set(std::size_t row, std::size_t col, ClassId c) {
    data_[row * width_ + col] = code(c);
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return std::span(data_).subspan(r * width_, width_);
  }
  std::span<std::uint8_t> mutable_row(std::size_t r) {
    return std::span(data_).subspan(r * width_, width_);
  }

  ClassHistogram histogram() const;

  bool operator==(const LabelRaster&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Row-major binary mask stored as 0/1 bytes.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height);
  /// Any nonzero byte counts as set.
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool at(std::size_t row, std::size_t col) const { return data_[row * width_ + col] != 0; }
  void set(std::size_t row, std::size_t col, bool v = true) {
    data_[row * width_ + col] = v ? 1 : 0;
  }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return std::span(data_).subspan(r * width_, width_);
  }
  std::span<std::uint8_t> mutable_row(std::size_t r) {
    return std::span(data_).subspan(r * width_, width_);
  }
  std::uint64_t count() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Mask of the pixels whose class is `c`.
BinaryMask mask_of(const LabelRaster& raster, ClassId c);

}  // namespace renalci
