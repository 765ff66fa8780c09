#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "renalci/error.hpp"
#include "renalci/metrics.hpp"
#include "support.hpp"

using namespace renalci;

namespace {

BinaryMask mask_from(std::size_t w, std::size_t h, const std::vector<int>& on) {
  BinaryMask m(w, h);
  for (int i : on) m.set(static_cast<std::size_t>(i) / w, static_cast<std::size_t>(i) % w, true);
  return m;
}

// rho = 1 - 6 sum d^2 / (n (n^2 - 1)) for untied ranks, with the two-sided
// permutation p-value over all n! orderings of y.
std::pair<double, double> spearman_oracle(const std::vector<int>& rx, const std::vector<int>& ry) {
  const auto n = static_cast<double>(rx.size());
  auto rho_of = [&](const std::vector<int>& y) {
    double d2 = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) d2 += double(rx[i] - y[i]) * (rx[i] - y[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1));
  };
  const double rho = rho_of(ry);
  std::vector<int> perm(rx.size());
  std::iota(perm.begin(), perm.end(), 1);
  long extreme = 0, total = 0;
  do {
    if (std::abs(rho_of(perm)) >= std::abs(rho) - 1e-12) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {rho, double(extreme) / double(total)};
}

}  // namespace

TEST_CASE("dice basics") {
  const auto a = mask_from(4, 4, {0, 1, 2, 3});
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, mask_from(4, 4, {12, 13})) == 0.0);
  CHECK(dice(a, mask_from(4, 4, {2, 3, 4, 5})) == 0.5);
  CHECK(dice(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
  CHECK_THROWS_AS(dice(a, BinaryMask(4, 5)), ShapeError);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto p = test::random_raster(rng, 40, 30, 8, 0.05);
    const auto t = test::random_raster(rng, 40, 30, 8, 0.05);
    for (ClassId c : kForegroundClasses) {
      std::uint64_t inter = 0, np = 0, nt = 0;
      for (std::size_t k = 0; k < p.data().size(); ++k) {
        const bool a1 = p.data()[k] == code(c), b1 = t.data()[k] == code(c);
        inter += a1 && b1;
        np += a1;
        nt += b1;
      }
      const double expected = np + nt == 0 ? 1.0 : 2.0 * double(inter) / double(np + nt);
      CHECK(class_dice(p, t, c) == doctest::Approx(expected).epsilon(1e-15));
      CHECK(class_dice(p, t, c) == class_dice(t, p, c));
    }
  }
}

TEST_CASE("quantile type 7") {
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("bootstrap interval") {
  const std::vector<double> constant(30, 0.7);
  const auto c = bootstrap_ci(constant, {0.95, 500, 3, 1});
  CHECK(c.low == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(c.high == doctest::Approx(0.7).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.8, 0.05);
  std::vector<double> s(60);
  for (auto& x : s) x = nd(rng);
  const auto a = bootstrap_ci(s, {0.95, 1000, 42, 1});
  CHECK(bootstrap_ci(s, {0.95, 1000, 42, 4}) == a);
  CHECK(bootstrap_ci(s, {0.95, 1000, 42, 1}) == a);
  CHECK_FALSE(bootstrap_ci(s, {0.95, 1000, 43, 1}) == a);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
  CHECK(a.low < mean);
  CHECK(a.high > mean);
  const auto narrow = bootstrap_ci(s, {0.5, 1000, 42, 1});
  CHECK(narrow.low >= a.low);
  CHECK(narrow.high <= a.high);

  CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{}, {}), InputError);
  CHECK_THROWS_AS(bootstrap_ci(s, {0.95, 0, 1, 1}), InputError);
}

TEST_CASE("bootstrap coverage of a known mean") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd(0.5, 0.1);
  int covered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> s(50);
    for (auto& x : s) x = nd(rng);
    const auto ci = bootstrap_ci(s, {0.95, 400, static_cast<std::uint64_t>(rep), 1});
    covered += ci.low <= 0.5 && 0.5 <= ci.high;
  }
  CHECK(covered >= 175);
}

TEST_CASE("evaluate_dice") {
  std::mt19937_64 rng(12);
  std::vector<LabelRaster> preds, truths;
  for (int i = 0; i < 8; ++i) {
    truths.push_back(test::random_raster(rng, 60, 60, 10, 0.0));
    preds.push_back(truths.back());
  }
  // an image where neither side has FC
  preds.push_back(LabelRaster(60, 60));
  truths.push_back(LabelRaster(60, 60));
  const std::vector<ClassId> classes = {ClassId::kGlomerulus, ClassId::kTubule};
  const auto rep = evaluate_dice(preds, truths, classes, {0.95, 200, 1, 2});
  REQUIRE(rep.per_class.size() == 2);
  for (const auto& c : rep.per_class) {
    CHECK(c.dice == 1.0);
    CHECK(c.ci == Interval{1.0, 1.0});
  }
  CHECK(rep.average == 1.0);
  const auto excl = evaluate_dice(preds, truths, classes, {0.95, 200, 1, 2}, true);
  CHECK(excl.per_class[0].n_images < rep.per_class[0].n_images);
  const std::vector<LabelRaster> one = {LabelRaster(60, 60)};
  CHECK_THROWS(evaluate_dice(preds, one, classes));
}

TEST_CASE("midranks") {
  const std::vector<double> v = {10, 20, 20, 5, 20};
  CHECK(midranks(v) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("spearman matches the sum of squared rank differences") {
  std::mt19937_64 rng(3);
  for (std::size_t n = 4; n <= 9; ++n) {
    for (int rep = 0; rep < 6; ++rep) {
      std::vector<int> rx(n), ry(n);
      std::iota(rx.begin(), rx.end(), 1);
      std::iota(ry.begin(), ry.end(), 1);
      std::shuffle(rx.begin(), rx.end(), rng);
      std::shuffle(ry.begin(), ry.end(), rng);
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rx[i] * 1.5 - 3;  // monotone transforms keep the ranks
        y[i] = std::exp(0.3 * ry[i]);
      }
      const auto [rho, p] = spearman_oracle(rx, ry);
      const auto got = spearman(x, y);
      CHECK(got.exact);
      CHECK(got.rho == doctest::Approx(rho).epsilon(1e-12));
      CHECK(got.p_value == doctest::Approx(p).epsilon(1e-12));
    }
  }
}

TEST_CASE("spearman edge cases") {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 4, 6, 8, 10}, rev = {5, 4, 3, 2, 1};
  CHECK(spearman(x, y).rho == 1.0);
  CHECK(spearman(x, rev).rho == -1.0);
  CHECK(spearman(x, y).p_value == doctest::Approx(2.0 / 120.0));
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 1, 1, 1, 1}), StatisticsError);
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), StatisticsError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), StatisticsError);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = nd(rng);
    b[i] = a[i] + nd(rng);
  }
  const auto big = spearman(a, b);
  CHECK_FALSE(big.exact);
  CHECK(big.rho > 0.4);
  CHECK(big.p_value < 0.01);
  CHECK(spearman(b, a).rho == big.rho);
}

TEST_CASE("cohen's kappa") {
  const std::vector<int> a = {0, 0, 1, 1}, b = {0, 1, 0, 1};
  CHECK(cohens_kappa(a, b) == doctest::Approx(0.0));
  CHECK(cohens_kappa(a, a) == 1.0);
  CHECK(cohens_kappa(std::vector<int>{0, 1, 0, 1}, std::vector<int>{1, 0, 1, 0}) ==
        doctest::Approx(-1.0));
  CHECK_THROWS_AS(cohens_kappa(std::vector<int>{2, 2}, std::vector<int>{2, 2}), StatisticsError);

  // hand example: 2x2 table [[20, 5], [10, 15]] gives po = .7, pe = .5, k = .4
  std::vector<int> r1, r2;
  auto add = [&](int x, int y, int n) {
    for (int i = 0; i < n; ++i) {
      r1.push_back(x);
      r2.push_back(y);
    }
  };
  add(0, 0, 20);
  add(0, 1, 5);
  add(1, 0, 10);
  add(1, 1, 15);
  CHECK(cohens_kappa(r1, r2) == doctest::Approx(0.4));
  // two categories: linear and quadratic weights coincide with unweighted
  CHECK(cohens_kappa(r1, r2, KappaWeighting::kLinear) == doctest::Approx(0.4));
  CHECK(cohens_kappa(r1, r2, KappaWeighting::kQuadratic) == doctest::Approx(0.4));

  // relabeling categories does not change unweighted kappa
  std::mt19937_64 rng(4);
  std::vector<int> x(80), y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x[i] = int(rng() % 4);
    y[i] = rng() % 3 == 0 ? int(rng() % 4) : x[i];
  }
  const std::array<int, 4> relabel = {7, 2, 9, 0};
  std::vector<int> xr(80), yr(80);
  for (std::size_t i = 0; i < 80; ++i) {
    xr[i] = relabel[static_cast<std::size_t>(x[i])];
    yr[i] = relabel[static_cast<std::size_t>(y[i])];
  }
  CHECK(cohens_kappa(xr, yr) == doctest::Approx(cohens_kappa(x, y)).epsilon(1e-12));
  CHECK(cohens_kappa(x, y) == doctest::Approx(cohens_kappa(y, x)).epsilon(1e-12));

  const std::vector<int> cats = {0, 1, 2};
  CHECK_THROWS(cohens_kappa(x, y, KappaWeighting::kNone, cats));
}
