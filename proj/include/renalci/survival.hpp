#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renalci/metrics.hpp"

namespace renalci {

/// One subject: follow-up time in years, event = composite endpoint reached.
struct SurvivalRecord {
  std::string subject_id;
  double time = 0.0;
  bool event = false;
  std::vector<double> covariates;  // aligned with Cohort::covariate_names

  bool operator==(const SurvivalRecord&) const = default;
};

struct Cohort {
  std::vector<std::string> covariate_names;
  std::vector<SurvivalRecord> records;

  /// Throws InputError if the covariate is unknown.
  std::size_t covariate_index(std::string_view name) const;
  std::vector<double> covariate(std::string_view name) const;
  /// Throws InputError on negative/non-finite times or ragged covariates.
  void validate() const;

  bool operator==(const Cohort&) const = default;
};

/// Columns: subject_id, time_years, event (0/1), then covariates.
Cohort read_cohort_csv(const std::filesystem::path& path);
Cohort parse_cohort_csv(std::string_view text);
void write_cohort_csv(const Cohort& cohort, std::ostream& out);

struct KMPoint {
  double time = 0.0;
  double survival = 1.0;
  std::size_t at_risk = 0;
  std::size_t events = 0;
  std::size_t censored = 0;
  double greenwood_se = 0.0;
  double ci_low = 1.0;  // log-transformed Greenwood interval
  double ci_high = 1.0;
};

/// Product-limit estimate with one point per distinct observed time.
struct KMEstimate {
  std::vector<KMPoint> points;
  std::optional<double> median;  // first time S(t) <= 0.5

  /// Right-continuous step function; 1 before the first event.
  double survival_at(double t) const;
};

/// Throws InputError for an empty cohort or invalid times.
KMEstimate km_estimate(std::span<const SurvivalRecord> records, double level = 0.95);

struct LogRankResult {
  double chi_square = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  std::vector<double> observed;
  std::vector<double> expected;
};

/// k-sample log-rank test against a chi-square reference with k-1 degrees
/// of freedom. Throws InputError unless there are at least two non-empty
/// groups.
LogRankResult logrank(std::span<const std::vector<SurvivalRecord>> groups);

/// Mann-Whitney AUC with half credit for tied scores. Throws InputError
/// unless both classes are present.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

struct AucResult {
  double auc = 0.5;
  Interval ci;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};

/// AUC with a percentile bootstrap interval. Positives and negatives are
/// resampled separately so every replicate has both classes.
AucResult auc_with_ci(std::span<const double> scores, const std::vector<bool>& labels,
                      const BootstrapOptions& opts = {});

}  // namespace renalci
