#include "renalci/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "renalci/error.hpp"

namespace renalci {

namespace {

// A coefficient this many covariate standard deviations from zero means a
// hazard ratio beyond e^10 per SD; the likelihood has no finite maximum.
constexpr double kMaxStandardizedBeta = 10.0;
constexpr double kMinConditioning = 1e-10;

}  // namespace

std::string tie_method_name(TieMethod ties) {
  return ties == TieMethod::kEfron ? "efron" : "breslow";
}

TieMethod parse_tie_method(std::string_view name) {
  if (name == "efron") return TieMethod::kEfron;
  if (name == "breslow") return TieMethod::kBreslow;
  throw ConfigError(fmt::format("unknown tie method '{}' (expected efron or breslow)", name));
}

CoxData::CoxData(std::span<const SurvivalRecord> records) {
  if (records.empty()) throw InputError("Cox: empty cohort");
  const std::size_t p = records.front().covariates.size();
  for (const auto& r : records) {
    if (!std::isfinite(r.time) || r.time < 0.0) {
      throw InputError(fmt::format("subject '{}': invalid time {}", r.subject_id, r.time));
    }
    if (r.covariates.size() != p) {
      throw InputError(fmt::format("subject '{}': {} covariates, expected {}", r.subject_id,
                                   r.covariates.size(), p));
    }
    for (double v : r.covariates) {
      if (!std::isfinite(v)) {
        throw InputError(fmt::format("subject '{}': non-finite covariate", r.subject_id));
      }
    }
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].time > records[b].time; });

  const auto n = static_cast<Eigen::Index>(records.size());
  x_.resize(n, static_cast<Eigen::Index>(p));
  event_.resize(records.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[order[static_cast<std::size_t>(i)]];
    for (std::size_t j = 0; j < p; ++j) x_(i, static_cast<Eigen::Index>(j)) = r.covariates[j];
    event_[static_cast<std::size_t>(i)] = r.event;
    if (r.event) ++n_events_;
    if (i == 0 || records[order[static_cast<std::size_t>(i - 1)]].time != r.time) {
      groups_.push_back({i, i + 1});
    } else {
      groups_.back().end = i + 1;
    }
  }
}

CoxData CoxData::with_columns(std::span<const Eigen::Index> columns) const {
  CoxData out;
  out.x_.resize(x_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.x_.col(static_cast<Eigen::Index>(j)) = x_.col(columns[j]);
  }
  out.event_ = event_;
  out.groups_ = groups_;
  out.n_events_ = n_events_;
  return out;
}

PartialLikelihood partial_loglik(const CoxData& data, const Eigen::VectorXd& beta,
                                 TieMethod ties) {
  const Eigen::Index p = data.p();
  if (beta.size() != p) {
    throw InputError(fmt::format("Cox: beta has {} entries for {} covariates", beta.size(), p));
  }
  const Eigen::MatrixXd& x = data.x();
  const Eigen::VectorXd eta = x * beta;
  const double c = data.n() > 0 ? eta.maxCoeff() : 0.0;
  const Eigen::VectorXd w = (eta.array() - c).exp().matrix();

  PartialLikelihood out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.hessian = Eigen::MatrixXd::Zero(p, p);

  double s0_risk = 0.0;
  Eigen::VectorXd s1_risk = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2_risk = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd d1(p), s1(p);
  Eigen::MatrixXd d2(p, p), s2(p, p);

  for (const auto& g : data.groups()) {
    double d0 = 0.0;
    d1.setZero();
    d2.setZero();
    std::size_t d = 0;
    for (Eigen::Index i = g.begin; i < g.end; ++i) {
      const auto xi = x.row(i).transpose();
      const double wi = w(i);
      s0_risk += wi;
      s1_risk.noalias() += wi * xi;
      s2_risk.noalias() += wi * xi * xi.transpose();
      if (data.event(i)) {
        ++d;
        d0 += wi;
        d1.noalias() += wi * xi;
        d2.noalias() += wi * xi * xi.transpose();
        out.value += eta(i);
        out.gradient += xi;
      }
    }
    for (std::size_t l = 0; l < d; ++l) {
      const double f =
          ties == TieMethod::kEfron ? static_cast<double>(l) / static_cast<double>(d) : 0.0;
      const double s0 = s0_risk - f * d0;
      s1 = s1_risk - f * d1;
      s2 = s2_risk - f * d2;
      out.value -= c + std::log(s0);
      out.gradient -= s1 / s0;
      out.hessian -= s2 / s0 - (s1 * s1.transpose()) / (s0 * s0);
    }
  }
  return out;
}

std::vector<double> CoxFit::betas() const {
  std::vector<double> out;
  for (const auto& c : coefficients) out.push_back(c.beta);
  return out;
}

CoxFit cox_fit(std::span<const SurvivalRecord> records, std::span<const std::string> names,
               const CoxOptions& opts) {
  if (opts.tol <= 0.0 || opts.max_iter < 1 || opts.max_halvings < 0) {
    throw ConfigError("Cox: tol must be positive and max_iter at least 1");
  }
  if (!(opts.level > 0.0 && opts.level < 1.0)) {
    throw ConfigError(fmt::format("Cox: confidence level {} outside (0, 1)", opts.level));
  }
  const CoxData full(records);
  if (static_cast<std::size_t>(full.p()) != names.size()) {
    throw InputError(fmt::format("Cox: {} names for {} covariate columns", names.size(), full.p()));
  }
  if (full.n_events() == 0) throw InputError("Cox: cohort has no events");

  CoxFit fit;
  fit.n = records.size();
  fit.n_events = full.n_events();
  fit.ties = opts.ties;
  fit.coefficients.resize(names.size());

  std::vector<Eigen::Index> active;
  std::vector<double> sd;
  for (Eigen::Index j = 0; j < full.p(); ++j) {
    auto& coef = fit.coefficients[static_cast<std::size_t>(j)];
    coef.name = names[static_cast<std::size_t>(j)];
    const auto col = full.x().col(j);
    if (col.maxCoeff() == col.minCoeff()) {
      coef.estimable = false;
      coef.se = std::numeric_limits<double>::infinity();
      coef.ci_high = std::numeric_limits<double>::infinity();
      continue;
    }
    active.push_back(j);
    const double mean = col.mean();
    sd.push_back(std::sqrt((col.array() - mean).square().sum() / static_cast<double>(full.n())));
  }

  const CoxData data = full.with_columns(active);
  const Eigen::Index p = data.p();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  PartialLikelihood cur = partial_loglik(data, beta, opts.ties);
  fit.null_log_likelihood = cur.value;

  if (p > 0) {
    const Eigen::MatrixXd info = -cur.hessian;
    const Eigen::VectorXd diag = info.diagonal();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!(diag(j) > 0.0)) {
        throw ConditioningError(fmt::format(
            "Cox: covariate '{}' does not vary within any risk set",
            fit.coefficients[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])].name));
      }
    }
    const Eigen::VectorXd inv_sqrt = diag.array().rsqrt().matrix();
    const Eigen::MatrixXd corr = inv_sqrt.asDiagonal() * info * inv_sqrt.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
    const double ratio = eig.eigenvalues().minCoeff() / eig.eigenvalues().maxCoeff();
    if (!(ratio > kMinConditioning)) {
      throw ConditioningError(fmt::format(
          "Cox: covariates are collinear (information condition ratio {:.3g})", ratio));
    }
  }

  for (int iter = 0; p > 0; ++iter) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < opts.tol) {
      fit.converged = true;
      break;
    }
    if (iter == opts.max_iter) break;
    fit.iterations = iter + 1;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(-cur.hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw ConditioningError("Cox: information matrix is not positive definite");
    }
    Eigen::VectorXd step = ldlt.solve(cur.gradient);
    // Newton steps below double precision cannot move beta any further.
    if (step.lpNorm<Eigen::Infinity>() <=
        4.0 * std::numeric_limits<double>::epsilon() * (1.0 + beta.lpNorm<Eigen::Infinity>())) {
      fit.converged = true;
      break;
    }
    const double slack = 1e-12 * (1.0 + std::abs(cur.value));
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      const Eigen::VectorXd trial = beta + step;
      PartialLikelihood next = partial_loglik(data, trial, opts.ties);
      if (std::isfinite(next.value) && next.value >= cur.value - slack) {
        beta = trial;
        cur = std::move(next);
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) {
      throw DivergenceError(fmt::format(
          "Cox: no improving step after {} halvings at iteration {} (log-likelihood {})",
          opts.max_halvings, iter + 1, cur.value));
    }
  }
  if (p == 0) fit.converged = true;

  if (!fit.converged) {
    throw DivergenceError(fmt::format(
        "Cox: no convergence after {} iterations (gradient max-norm {:.3g}); the likelihood "
        "may be monotone",
        opts.max_iter, cur.gradient.lpNorm<Eigen::Infinity>()));
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scaled = std::abs(beta(j)) * sd[static_cast<std::size_t>(j)];
    if (scaled > kMaxStandardizedBeta) {
      const auto& name =
          fit.coefficients[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])].name;
      throw DivergenceError(fmt::format(
          "Cox: coefficient of '{}' diverges (beta = {:.4g}, {:.3g} SD units); the covariate "
          "separates events from non-events (monotone likelihood)",
          name, beta(j), scaled));
    }
  }

  fit.log_likelihood = cur.value;
  const boost::math::normal normal;
  const double zq = boost::math::quantile(normal, 0.5 + opts.level / 2.0);
  if (p > 0) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(-cur.hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw ConditioningError("Cox: information matrix at the optimum is not positive definite");
    }
    fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  } else {
    fit.covariance.resize(0, 0);
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& coef = fit.coefficients[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])];
    coef.beta = beta(j);
    coef.hazard_ratio = std::exp(coef.beta);
    coef.se = std::sqrt(fit.covariance(j, j));
    coef.z = coef.beta / coef.se;
    coef.p_value = 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(coef.z)));
    coef.ci_low = std::exp(coef.beta - zq * coef.se);
    coef.ci_high = std::exp(coef.beta + zq * coef.se);
  }

  fit.lr_df = static_cast<std::size_t>(p);
  fit.lr_statistic = std::max(0.0, 2.0 * (fit.log_likelihood - fit.null_log_likelihood));
  if (p > 0) {
    fit.lr_p_value = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared(static_cast<double>(p)), fit.lr_statistic));
  }
  return fit;
}

std::vector<double> linear_predictor(const CoxFit& fit, std::span<const SurvivalRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.covariates.size() != fit.coefficients.size()) {
      throw InputError(fmt::format("subject '{}': {} covariates, model has {}", r.subject_id,
                                   r.covariates.size(), fit.coefficients.size()));
    }
    double lp = 0.0;
    for (std::size_t j = 0; j < r.covariates.size(); ++j) {
      lp += fit.coefficients[j].beta * r.covariates[j];
    }
    out.push_back(lp);
  }
  return out;
}

Cohort select_covariates(const Cohort& cohort, std::span<const std::string> names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(cohort.covariate_index(n));
  Cohort out;
  out.covariate_names.assign(names.begin(), names.end());
  out.records.reserve(cohort.records.size());
  for (const auto& r : cohort.records) {
    SurvivalRecord s{r.subject_id, r.time, r.event, {}};
    for (std::size_t k : idx) s.covariates.push_back(r.covariates.at(k));
    out.records.push_back(std::move(s));
  }
  return out;
}

}  // namespace renalci
