#include "renalci/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "renalci/csv.hpp"
#include "renalci/error.hpp"
#include "renalci/fileio.hpp"
#include "renalci/parallel.hpp"
#include "renalci/random.hpp"

namespace renalci {

std::size_t Cohort::covariate_index(std::string_view name) const {
  auto it = std::find(covariate_names.begin(), covariate_names.end(), name);
  if (it == covariate_names.end()) {
    throw InputError(fmt::format("cohort has no covariate '{}'", name));
  }
  return static_cast<std::size_t>(it - covariate_names.begin());
}

std::vector<double> Cohort::covariate(std::string_view name) const {
  const std::size_t k = covariate_index(name);
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.covariates[k]);
  return out;
}

void Cohort::validate() const {
  for (const auto& r : records) {
    if (!std::isfinite(r.time) || r.time < 0.0) {
      throw InputError(fmt::format("subject '{}': invalid time {}", r.subject_id, r.time));
    }
    if (r.covariates.size() != covariate_names.size()) {
      throw InputError(fmt::format("subject '{}': {} covariates, expected {}", r.subject_id,
                                   r.covariates.size(), covariate_names.size()));
    }
  }
}

Cohort parse_cohort_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (table.header.size() < 3) {
    throw ParseError("cohort CSV needs subject_id, time_years and event columns");
  }
  Cohort cohort;
  cohort.covariate_names.assign(table.header.begin() + 3, table.header.end());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    SurvivalRecord r;
    r.subject_id = row[0];
    const auto ctx = fmt::format("cohort row {}", i + 1);
    r.time = parse_double(row[1], ctx);
    if (row[2] == "1") {
      r.event = true;
    } else if (row[2] == "0") {
      r.event = false;
    } else {
      throw InputError(fmt::format("{}: event must be 0 or 1, got '{}'", ctx, row[2]));
    }
    for (std::size_t k = 3; k < row.size(); ++k) r.covariates.push_back(parse_double(row[k], ctx));
    cohort.records.push_back(std::move(r));
  }
  cohort.validate();
  return cohort;
}

Cohort read_cohort_csv(const std::filesystem::path& path) {
  try {
    return parse_cohort_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_cohort_csv(const Cohort& cohort, std::ostream& out) {
  out << "subject_id,time_years,event";
  for (const auto& n : cohort.covariate_names) out << ',' << csv_field(n);
  out << '\n';
  for (const auto& r : cohort.records) {
    out << csv_field(r.subject_id) << ',' << format_double(r.time) << ',' << (r.event ? 1 : 0);
    for (double v : r.covariates) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

double normal_quantile(double level) {
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

void check_times(std::span<const SurvivalRecord> records) {
  for (const auto& r : records) {
    if (!std::isfinite(r.time) || r.time < 0.0) {
      throw InputError(fmt::format("subject '{}': invalid time {}", r.subject_id, r.time));
    }
  }
}

}  // namespace

double KMEstimate::survival_at(double t) const {
  double s = 1.0;
  for (const auto& p : points) {
    if (p.time > t) break;
    s = p.survival;
  }
  return s;
}

KMEstimate km_estimate(std::span<const SurvivalRecord> records, double level) {
  if (records.empty()) throw InputError("Kaplan-Meier: empty cohort");
  check_times(records);
  const double z = normal_quantile(level);

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });

  // Between censorings the product of (n - d) / n telescopes, so S is formed
  // as (survival at the last censoring) * (remaining / at risk then). With no
  // censoring this is exactly remaining / n.
  KMEstimate est;
  std::size_t at_risk = records.size();
  std::size_t run_start = at_risk;
  double run_base = 1.0;
  double survival = 1.0;
  double var_sum = 0.0;  // Greenwood: sum d / (n (n - d))

  for (std::size_t i = 0; i < order.size();) {
    const double t = records[order[i]].time;
    std::size_t d = 0, c = 0;
    for (; i < order.size() && records[order[i]].time == t; ++i) {
      (records[order[i]].event ? d : c) += 1;
    }
    KMPoint p;
    p.time = t;
    p.at_risk = at_risk;
    p.events = d;
    p.censored = c;
    if (d > 0) {
      survival = run_base * static_cast<double>(at_risk - d) / static_cast<double>(run_start);
      if (at_risk > d) {
        var_sum += static_cast<double>(d) /
                   (static_cast<double>(at_risk) * static_cast<double>(at_risk - d));
      } else {
        var_sum = std::numeric_limits<double>::infinity();
      }
    }
    p.survival = survival;
    if (survival <= 0.0) {
      p.greenwood_se = 0.0;
      p.ci_low = p.ci_high = 0.0;
    } else {
      const double se_log = std::sqrt(var_sum);
      p.greenwood_se = survival * se_log;
      p.ci_low = survival * std::exp(-z * se_log);
      p.ci_high = std::min(1.0, survival * std::exp(z * se_log));
    }
    if (!est.median && d > 0 && survival <= 0.5) est.median = t;
    est.points.push_back(p);

    at_risk -= d + c;
    if (c > 0) {
      run_base = survival;
      run_start = at_risk;
    }
  }
  return est;
}

LogRankResult logrank(std::span<const std::vector<SurvivalRecord>> groups) {
  if (groups.size() < 2) throw InputError("log-rank: need at least two groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw InputError(fmt::format("log-rank: group {} is empty", g));
    check_times(groups[g]);
  }
  const std::size_t k = groups.size();

  struct Obs {
    double time;
    std::size_t group;
    bool event;
  };
  std::vector<Obs> all;
  std::vector<std::size_t> at_risk(k, 0);
  for (std::size_t g = 0; g < k; ++g) {
    for (const auto& r : groups[g]) all.push_back({r.time, g, r.event});
    at_risk[g] = groups[g].size();
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Obs& a, const Obs& b) { return a.time < b.time; });

  Eigen::VectorXd o_minus_e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                            static_cast<Eigen::Index>(k));
  LogRankResult out;
  out.observed.assign(k, 0.0);
  out.expected.assign(k, 0.0);

  for (std::size_t i = 0; i < all.size();) {
    const double t = all[i].time;
    std::vector<std::size_t> d(k, 0), removed(k, 0);
    for (; i < all.size() && all[i].time == t; ++i) {
      ++removed[all[i].group];
      if (all[i].event) ++d[all[i].group];
    }
    const double n = static_cast<double>(std::accumulate(at_risk.begin(), at_risk.end(), 0ul));
    const double dt = static_cast<double>(std::accumulate(d.begin(), d.end(), 0ul));
    if (dt > 0) {
      for (std::size_t g = 0; g < k; ++g) {
        const double ng = static_cast<double>(at_risk[g]);
        const double e = dt * ng / n;
        out.observed[g] += static_cast<double>(d[g]);
        out.expected[g] += e;
        o_minus_e[static_cast<Eigen::Index>(g)] += static_cast<double>(d[g]) - e;
        if (n > 1) {
          const double scale = dt * (n - dt) / (n - 1.0);
          for (std::size_t h = 0; h < k; ++h) {
            const double nh = static_cast<double>(at_risk[h]);
            v(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) +=
                scale * (ng / n) * ((g == h ? 1.0 : 0.0) - nh / n);
          }
        }
      }
    }
    for (std::size_t g = 0; g < k; ++g) at_risk[g] -= removed[g];
  }

  // The k statistics sum to zero; drop the last group.
  const auto m = static_cast<Eigen::Index>(k - 1);
  const Eigen::VectorXd u = o_minus_e.head(m);
  const Eigen::MatrixXd vm = v.topLeftCorner(m, m);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(vm);
  cod.setThreshold(1e-12);
  out.df = static_cast<std::size_t>(cod.rank());
  if (out.df == 0) {
    out.chi_square = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.chi_square = std::max(0.0, u.dot(cod.solve(u)));
  boost::math::chi_squared dist(static_cast<double>(out.df));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi_square));
  return out;
}

namespace {

void check_auc_inputs(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw InputError(fmt::format("AUC: {} scores but {} labels", scores.size(), labels.size()));
  }
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (pos == 0 || pos == labels.size()) {
    throw InputError("AUC: both positive and negative labels are required");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InputError("AUC: non-finite score");
  }
}

double auc_unchecked(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto ranks = midranks(scores);
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) {
      rank_sum += ranks[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(ranks.size()) - n_pos;
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

}  // namespace

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  check_auc_inputs(scores, labels);
  return auc_unchecked(scores, labels);
}

AucResult auc_with_ci(std::span<const double> scores, const std::vector<bool>& labels,
                      const BootstrapOptions& opts) {
  check_auc_inputs(scores, labels);
  if (opts.n_resamples == 0) throw InputError("AUC: n_resamples must be at least 1");

  AucResult out;
  out.auc = auc_unchecked(scores, labels);
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? pos : neg).push_back(scores[i]);
  out.n_positive = pos.size();
  out.n_negative = neg.size();

  std::vector<double> replicates(opts.n_resamples);
  parallel_for(opts.n_resamples, opts.jobs, [&](std::size_t r) {
    Rng rng = substream(opts.seed, r);
    std::uniform_int_distribution<std::size_t> pick_pos(0, pos.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neg(0, neg.size() - 1);
    std::vector<double> s;
    std::vector<bool> l;
    s.reserve(scores.size());
    l.reserve(scores.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
      s.push_back(pos[pick_pos(rng)]);
      l.push_back(true);
    }
    for (std::size_t i = 0; i < neg.size(); ++i) {
      s.push_back(neg[pick_neg(rng)]);
      l.push_back(false);
    }
    replicates[r] = auc_unchecked(s, l);
  });
  std::sort(replicates.begin(), replicates.end());
  const double alpha = 1.0 - opts.level;
  out.ci = {quantile_sorted(replicates, alpha / 2.0),
            quantile_sorted(replicates, 1.0 - alpha / 2.0)};
  return out;
}

}  // namespace renalci
