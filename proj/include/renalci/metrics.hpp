#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "renalci/raster.hpp"

namespace renalci {

/// 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty. Throws ShapeError on
/// a dimension mismatch.
double dice(const BinaryMask& pred, const BinaryMask& truth);

/// Dice of one class between two label rasters.
double class_dice(const LabelRaster& pred, const LabelRaster& truth, ClassId cls);

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const Interval&) const = default;
};

struct BootstrapOptions {
  double level = 0.95;
  std::size_t n_resamples = 2000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Linear-interpolation quantile (R type 7) of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Percentile interval of the mean over resampled-with-replacement copies of
/// `samples`. Resample i draws from its own substream of the seed, so the
/// result does not depend on opts.jobs. Throws InputError for empty samples
/// or zero resamples.
Interval bootstrap_ci(std::span<const double> samples, const BootstrapOptions& opts = {});

struct ClassDice {
  ClassId cls = ClassId::kBackground;
  double dice = 0.0;  // mean over images
  Interval ci;
  std::size_t n_images = 0;
  /// Images where neither mask has the class; scored 1.0 unless excluded.
  std::vector<std::size_t> both_empty;
};

struct DiceReport {
  std::vector<ClassDice> per_class;
  double average = 0.0;  // mean of per-class Dice
};

/// Per-image Dice for every class, bootstrapped over images.
DiceReport evaluate_dice(std::span<const LabelRaster> preds, std::span<const LabelRaster> truths,
                         std::span<const ClassId> classes, const BootstrapOptions& opts = {},
                         bool exclude_both_empty = false);

/// Average ranks, ties sharing the mean of their positions (1-based).
std::vector<double> midranks(std::span<const double> values);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;    // permutation enumeration rather than t approximation
};

inline constexpr std::size_t kSpearmanExactMaxN = 9;

/// Pearson correlation of midranks. The p-value enumerates all n!
/// permutations for n <= 9 and uses the t approximation with n-2 degrees of
/// freedom above. Throws StatisticsError for mismatched or short inputs and
/// for constant vectors.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

enum class KappaWeighting { kNone, kLinear, kQuadratic };

struct RatingVector {
  std::string rater_id;
  std::vector<int> values;
};

/// Cohen's kappa. Categories default to the union of observed values; when
/// given, every rating must belong to them. Weighted variants use
/// disagreement weights |i-j|/(k-1) or its square over category positions.
/// Throws StatisticsError when chance agreement is total (p_e = 1).
double cohens_kappa(std::span<const int> a, std::span<const int> b,
                    KappaWeighting weighting = KappaWeighting::kNone,
                    std::span<const int> categories = {});

inline double cohens_kappa(const RatingVector& a, const RatingVector& b,
                           KappaWeighting weighting = KappaWeighting::kNone) {
  return cohens_kappa(a.values, b.values, weighting);
}

}  // namespace renalci
