#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renalci/features.hpp"
#include "renalci/fusion.hpp"
#include "renalci/raster.hpp"
#include "renalci/scoring.hpp"
#include "renalci/survival.hpp"

namespace renalci {

/// Parameters of one synthetic slide. Glomeruli are discs, tubules and
/// interstitial fibrosis are axis-aligned rectangles.
struct SynthSpec {
  std::size_t width = 1500;
  std::size_t height = 1500;
  std::size_t n_glomeruli = 20;
  std::size_t n_gs = 4;
  std::size_t n_fc = 2;
  std::size_t n_tubules = 40;  // Tubule and TA rectangles together
  double p_if = 0.1;           // target IF / cortex
  double p_ta = 0.2;           // target TA / (Tubule + TA)
  std::size_t glom_radius_min = 12;
  std::size_t glom_radius_max = 30;
  std::size_t rect_min = 8;
  std::size_t rect_max = 60;
  std::size_t max_attempts = 2000;  // placement retries per blob
  std::uint64_t seed = 0;

  /// Throws ConfigError for inconsistent counts, fractions outside [0, 1) or
  /// empty size ranges.
  void validate() const;
  bool operator==(const SynthSpec&) const = default;
};

struct SynthSlide {
  LabelRaster raster;
  /// Tallied while painting, independent of any analysis code.
  DiagnosticFeatures features;
  ChronicityResult truth;  // conventional rule
};

/// Places every blob with at least one background pixel between blobs, even
/// diagonally, so each blob is exactly one connected component.
/// Deterministic in spec.seed. Throws CapacityError when a blob cannot be
/// placed within spec.max_attempts tries.
SynthSlide generate_slide(const SynthSpec& spec, std::string slide_id = "synth");

/// Overlapping per-class masks of the kind separate segmentation models emit:
/// whole glomeruli in the Glomerulus mask with GS and FC regions on top, TA
/// inside the Tubule mask. Fusing them under the default precedence gives back
/// the raster.
std::vector<MaskSource> model_masks(const LabelRaster& raster);

enum class CovariateKind { kBinary, kNormal, kCategorical };

std::string covariate_kind_name(CovariateKind kind);
/// Throws ConfigError.
CovariateKind parse_covariate_kind(std::string_view name);

struct CovariateSpec {
  std::string name;
  CovariateKind kind = CovariateKind::kBinary;
  double p = 0.5;                    // binary: P(x = 1)
  double mean = 0.0;                 // normal
  double sd = 1.0;                   // normal
  std::vector<double> level_probs;   // categorical: P(x = k), k = 0, 1, ...
  double beta = 0.0;

  bool operator==(const CovariateSpec&) const = default;
};

/// Exponential proportional-hazards cohort: hazard = baseline_hazard *
/// exp(sum beta_j x_j), censored by Uniform(0, censor_max) (when positive)
/// and at admin_time (when positive).
struct CohortSpec {
  std::size_t n = 200;
  std::vector<CovariateSpec> covariates;
  double baseline_hazard = 0.1;
  double censor_max = 0.0;
  double admin_time = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const CohortSpec&) const = default;
};

/// Subject i draws from its own substream, so the cohort does not depend on
/// `jobs`.
Cohort generate_cohort(const CohortSpec& spec, unsigned jobs = 1);

}  // namespace renalci
