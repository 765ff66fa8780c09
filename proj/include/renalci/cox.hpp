#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "renalci/survival.hpp"

namespace renalci {

enum class TieMethod { kEfron, kBreslow };

std::string tie_method_name(TieMethod ties);
/// "efron" or "breslow". Throws ConfigError.
TieMethod parse_tie_method(std::string_view name);

/// Design matrix and outcomes ordered by descending time, with tied times
/// grouped. Shared by every likelihood evaluation of one fit.
class CoxData {
 public:
  /// Uses every covariate of the records. Throws InputError on invalid times,
  /// ragged covariates or an empty cohort.
  explicit CoxData(std::span<const SurvivalRecord> records);

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index p() const { return x_.cols(); }
  std::size_t n_events() const { return n_events_; }
  const Eigen::MatrixXd& x() const { return x_; }

  /// Rows [begin, end) share one time.
  struct TieGroup {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
  };
  const std::vector<TieGroup>& groups() const { return groups_; }
  bool event(Eigen::Index row) const { return event_[static_cast<std::size_t>(row)]; }

  /// Same subjects restricted to the given covariate columns.
  CoxData with_columns(std::span<const Eigen::Index> columns) const;

 private:
  CoxData() = default;

  Eigen::MatrixXd x_;
  std::vector<bool> event_;
  std::vector<TieGroup> groups_;
  std::size_t n_events_ = 0;
};

struct PartialLikelihood {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Log partial likelihood with analytic gradient and Hessian. Breslow is the
/// Efron formula with the tied-event correction switched off, so the two agree
/// bit for bit when no event times are tied.
PartialLikelihood partial_loglik(const CoxData& data, const Eigen::VectorXd& beta,
                                 TieMethod ties = TieMethod::kEfron);

struct CoxOptions {
  TieMethod ties = TieMethod::kEfron;
  double tol = 1e-9;  // gradient max-norm
  int max_iter = 50;
  int max_halvings = 20;
  double level = 0.95;
};

struct CoxCoefficient {
  std::string name;
  double beta = 0.0;
  double hazard_ratio = 1.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;  // on the hazard-ratio scale
  double ci_high = 0.0;
  /// False for a covariate with no variation; it is held at beta = 0.
  bool estimable = true;
};

struct CoxFit {
  std::vector<CoxCoefficient> coefficients;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double lr_statistic = 0.0;  // likelihood-ratio test of all coefficients
  std::size_t lr_df = 0;
  double lr_p_value = 1.0;
  int iterations = 0;
  bool converged = false;
  std::size_t n = 0;
  std::size_t n_events = 0;
  TieMethod ties = TieMethod::kEfron;
  Eigen::MatrixXd covariance;  // estimable coefficients only

  std::vector<double> betas() const;
};

/// Newton-Raphson maximization of the partial likelihood with step halving.
/// `names` labels the covariate columns of the records.
///
/// Throws InputError without events or with a name/column mismatch,
/// ConditioningError for (near-)collinear covariates, and DivergenceError when
/// the iteration fails to converge or a coefficient runs off to infinity
/// (monotone likelihood).
CoxFit cox_fit(std::span<const SurvivalRecord> records, std::span<const std::string> names,
               const CoxOptions& opts = {});

/// x'beta for each record.
std::vector<double> linear_predictor(const CoxFit& fit, std::span<const SurvivalRecord> records);

/// Copy of the cohort restricted to the named covariates, in that order.
Cohort select_covariates(const Cohort& cohort, std::span<const std::string> names);

}  // namespace renalci
