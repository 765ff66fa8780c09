#include "renalci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"
#include "renalci/random.hpp"

namespace renalci {

double dice(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw ShapeError(fmt::format("dice: {}x{} prediction vs {}x{} truth", pred.width(),
                                 pred.height(), truth.width(), truth.height()));
  }
  std::uint64_t a = 0, b = 0, both = 0;
  const auto p = pred.data();
  const auto t = truth.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    a += p[i];
    b += t[i];
    both += p[i] & t[i];
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double class_dice(const LabelRaster& pred, const LabelRaster& truth, ClassId cls) {
  return dice(mask_of(pred, cls), mask_of(truth, cls));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> samples, const BootstrapOptions& opts) {
  if (samples.empty()) throw InputError("bootstrap: empty sample");
  if (opts.n_resamples == 0) throw InputError("bootstrap: n_resamples must be at least 1");
  if (!(opts.level > 0.0 && opts.level < 1.0)) {
    throw InputError(fmt::format("bootstrap: level {} outside (0, 1)", opts.level));
  }

  const std::size_t n = samples.size();
  std::vector<double> means(opts.n_resamples);
  parallel_for(opts.n_resamples, opts.jobs, [&](std::size_t r) {
    Rng rng = substream(opts.seed, r);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += samples[pick(rng)];
    means[r] = sum / static_cast<double>(n);
  });
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - opts.level;
  return {quantile_sorted(means, alpha / 2.0), quantile_sorted(means, 1.0 - alpha / 2.0)};
}

DiceReport evaluate_dice(std::span<const LabelRaster> preds, std::span<const LabelRaster> truths,
                         std::span<const ClassId> classes, const BootstrapOptions& opts,
                         bool exclude_both_empty) {
  if (preds.size() != truths.size()) {
    throw InputError(fmt::format("dice: {} predictions but {} ground-truth images",
                                 preds.size(), truths.size()));
  }
  if (preds.empty()) throw InputError("dice: no images");
  if (classes.empty()) throw InputError("dice: no classes requested");

  // per_image[k][i] = Dice of class k on image i
  std::vector<std::vector<double>> per_image(classes.size(),
                                             std::vector<double>(preds.size()));
  std::vector<std::vector<bool>> empty(classes.size(), std::vector<bool>(preds.size()));
  parallel_for(preds.size(), opts.jobs, [&](std::size_t i) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto p = mask_of(preds[i], classes[k]);
      const auto t = mask_of(truths[i], classes[k]);
      per_image[k][i] = dice(p, t);
      empty[k][i] = p.count() == 0 && t.count() == 0;
    }
  });

  DiceReport report;
  double sum = 0.0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    ClassDice cd;
    cd.cls = classes[k];
    std::vector<double> values;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (empty[k][i]) {
        cd.both_empty.push_back(i);
        if (exclude_both_empty) continue;
      }
      values.push_back(per_image[k][i]);
    }
    cd.n_images = values.size();
    if (values.empty()) {
      throw InputError(fmt::format("dice: class {} is absent from every image pair",
                                   class_name(classes[k])));
    }
    cd.dice = std::accumulate(values.begin(), values.end(), 0.0) /
              static_cast<double>(values.size());
    BootstrapOptions class_opts = opts;
    class_opts.seed = mix64(opts.seed + code(classes[k]));
    cd.ci = bootstrap_ci(values, class_opts);
    sum += cd.dice;
    report.per_class.push_back(std::move(cd));
  }
  report.average = sum / static_cast<double>(classes.size());
  return report;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatisticsError(fmt::format("spearman: lengths differ ({} vs {})", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 3) throw StatisticsError("spearman: need at least 3 pairs");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw StatisticsError(fmt::format("spearman: non-finite value at index {}", i));
    }
  }

  // Centered midranks are multiples of 1/2, so the sums below are exact.
  auto centered = [n](std::span<const double> v) {
    auto r = midranks(v);
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    for (auto& e : r) e -= mean;
    return r;
  };
  const auto cx = centered(x);
  const auto cy = centered(y);
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  const double sxx = dot(cx, cx);
  const double syy = dot(cy, cy);
  if (sxx == 0.0 || syy == 0.0) throw StatisticsError("spearman: constant input");
  const double sxy = dot(cx, cy);

  SpearmanResult out;
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  if (n <= kSpearmanExactMaxN) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double observed = std::abs(sxy);
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cx[i] * cy[perm[i]];
      if (std::abs(s) >= observed) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    out.exact = true;
    return out;
  }

  const double df = static_cast<double>(n) - 2.0;
  const double one_minus = 1.0 - out.rho * out.rho;
  if (one_minus <= 0.0) {
    out.p_value = 0.0;
    return out;
  }
  const double t = out.rho * std::sqrt(df / one_minus);
  boost::math::students_t dist(df);
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return out;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b, KappaWeighting weighting,
                    std::span<const int> categories) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("kappa: rating vectors differ in length ({} vs {})", a.size(),
                                 b.size()));
  }
  if (a.empty()) throw InputError("kappa: no ratings");

  std::map<int, std::size_t> index;
  if (categories.empty()) {
    for (int v : a) index.emplace(v, 0);
    for (int v : b) index.emplace(v, 0);
  } else {
    for (int v : categories) index.emplace(v, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!index.contains(a[i]) || !index.contains(b[i])) {
        throw InputError(fmt::format("kappa: rating at index {} is not a declared category", i));
      }
    }
  }
  std::size_t pos = 0;
  for (auto& [value, idx] : index) idx = pos++;
  const std::size_t k = index.size();

  const auto n = static_cast<double>(a.size());
  std::vector<double> table(k * k, 0.0), row(k, 0.0), col(k, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = index[a[i]];
    const std::size_t c = index[b[i]];
    table[r * k + c] += 1.0;
    row[r] += 1.0;
    col[c] += 1.0;
  }

  auto disagreement = [&](std::size_t i, std::size_t j) {
    if (i == j) return 0.0;
    if (weighting == KappaWeighting::kNone || k < 2) return 1.0;
    const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) /
                     static_cast<double>(k - 1);
    return weighting == KappaWeighting::kLinear ? d : d * d;
  };

  double observed = 0.0;  // weighted observed disagreement
  double expected = 0.0;  // weighted chance disagreement
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double w = disagreement(i, j);
      observed += w * table[i * k + j] / n;
      expected += w * (row[i] / n) * (col[j] / n);
    }
  }
  if (expected == 0.0) {
    throw StatisticsError("kappa: chance agreement is 1 (both raters constant); kappa undefined");
  }
  return 1.0 - observed / expected;
}

}  // namespace renalci
