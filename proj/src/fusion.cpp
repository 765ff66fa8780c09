#include "renalci/fusion.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"

namespace renalci {

PrecedenceOrder::PrecedenceOrder()
    : PrecedenceOrder({ClassId::kGS, ClassId::kFC, ClassId::kTA, ClassId::kIF,
                       ClassId::kGlomerulus, ClassId::kTubule}) {}

PrecedenceOrder::PrecedenceOrder(std::vector<ClassId> order) : order_(std::move(order)) {
  if (order_.size() != kForegroundClasses.size()) {
    throw ConfigError(fmt::format("precedence order must list {} classes, got {}",
                                  kForegroundClasses.size(), order_.size()));
  }
  rank_.fill(kNumClasses);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const ClassId c = order_[i];
    if (c == ClassId::kBackground) {
      throw ConfigError("Background cannot appear in a precedence order");
    }
    if (rank_[code(c)] != kNumClasses) {
      throw ConfigError(fmt::format("class {} listed twice in precedence order", class_name(c)));
    }
    rank_[code(c)] = i;
  }
}

PrecedenceOrder PrecedenceOrder::from_names(const std::vector<std::string>& names) {
  std::vector<ClassId> order;
  for (const auto& n : names) {
    auto c = parse_class(n);
    if (!c) throw ConfigError(fmt::format("unknown class '{}' in precedence order", n));
    order.push_back(*c);
  }
  return PrecedenceOrder(std::move(order));
}

namespace {

void check_sources(std::size_t width, std::size_t height, std::span<const MaskSource> sources) {
  for (const auto& s : sources) {
    if (s.cls == ClassId::kBackground) throw ConfigError("a mask source cannot be Background");
    if (s.mask.width() != width || s.mask.height() != height) {
      throw ShapeError(fmt::format("{} mask is {}x{}, expected {}x{}", class_name(s.cls),
                                   s.mask.width(), s.mask.height(), width, height));
    }
  }
}

}  // namespace

LabelRaster fuse(std::size_t width, std::size_t height, std::span<const MaskSource> sources,
                 const PrecedenceOrder& order, unsigned jobs) {
  check_sources(width, height, sources);

  // Paint lowest precedence first so higher classes overwrite. Sources of the
  // same class paint the same code, so their relative order is irrelevant.
  std::vector<std::size_t> paint(sources.size());
  std::iota(paint.begin(), paint.end(), 0);
  std::stable_sort(paint.begin(), paint.end(), [&](std::size_t a, std::size_t b) {
    return order.rank(sources[a].cls) > order.rank(sources[b].cls);
  });

  LabelRaster out(width, height);
  parallel_for(height, jobs, [&](std::size_t r) {
    auto dst = out.mutable_row(r);
    for (std::size_t i : paint) {
      const auto src = sources[i].mask.row(r);
      const std::uint8_t value = code(sources[i].cls);
      for (std::size_t c = 0; c < width; ++c) {
        if (src[c]) dst[c] = value;
      }
    }
  });
  return out;
}

std::uint64_t FusionReport::resolved(ClassId winner, ClassId loser) const {
  for (const auto& o : overlaps) {
    if (o.winner == winner && o.loser == loser) return o.pixels;
  }
  return 0;
}

FusionReport validate_fusion(const LabelRaster& raster, std::span<const MaskSource> sources,
                             const PrecedenceOrder& order) {
  check_sources(raster.width(), raster.height(), sources);
  FusionReport report;
  report.class_counts = raster.histogram();

  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> pair{};
  const auto labels = raster.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::uint8_t covered = 0;  // bit per class code
    for (const auto& s : sources) {
      if (s.mask.data()[i]) covered |= static_cast<std::uint8_t>(1u << code(s.cls));
    }
    ClassId expected = ClassId::kBackground;
    std::size_t best = kNumClasses;
    for (ClassId c : kForegroundClasses) {
      if ((covered >> code(c)) & 1u && order.rank(c) < best) {
        best = order.rank(c);
        expected = c;
      }
    }
    if (code(expected) != labels[i]) ++report.inconsistent_pixels;
    if (std::popcount(covered) > 1) {
      ++report.overlap_pixels;
      for (ClassId c : kForegroundClasses) {
        if (c != expected && ((covered >> code(c)) & 1u)) ++pair[code(expected)][code(c)];
      }
    }
  }

  for (ClassId w : order.classes()) {
    for (ClassId l : order.classes()) {
      if (pair[code(w)][code(l)] > 0) report.overlaps.push_back({w, l, pair[code(w)][code(l)]});
    }
  }
  return report;
}

}  // namespace renalci
