#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "renalci/error.hpp"
#include "renalci/survival.hpp"
#include "support.hpp"

using namespace renalci;

namespace {

double pair_count_auc(const std::vector<double>& s, const std::vector<bool>& y) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      den += 1;
      num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("KM hand case") {
  // events at 1 and 3, censored at 2
  const auto rec = test::make_records({1, 2, 3}, {true, false, true});
  const auto km = km_estimate(rec);
  REQUIRE(km.points.size() == 3);
  CHECK(km.survival_at(0.5) == 1.0);
  CHECK(km.survival_at(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(km.survival_at(2.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(km.survival_at(3.0) == 0.0);
  CHECK(km.points[1].censored == 1);
  CHECK(km.points[1].at_risk == 2);
  REQUIRE(km.median.has_value());
  CHECK(*km.median == 3.0);

  // Greenwood at t=1: S^2 * 1/(3*2)
  const double se = (2.0 / 3.0) * std::sqrt(1.0 / 6.0);
  CHECK(km.points[0].greenwood_se == doctest::Approx(se).epsilon(1e-12));
  CHECK(km.points[0].ci_low < km.points[0].survival);
  CHECK(km.points[0].ci_high > km.points[0].survival);
  CHECK(km.points[0].ci_high <= 1.0);
}

TEST_CASE("KM without censoring equals one minus the ECDF") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 5 + rng() % 60;
    std::vector<double> t(n);
    for (auto& x : t) x = double(1 + rng() % 30) / 2.0;  // plenty of ties
    const auto km = km_estimate(test::make_records(t, std::vector<bool>(n, true)));
    for (double q = 0; q <= 16; q += 0.25) {
      const auto above = std::count_if(t.begin(), t.end(), [&](double x) { return x > q; });
      CHECK(km.survival_at(q) == double(above) / double(n));
    }
  }
}

TEST_CASE("KM properties with censoring") {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> ev(0.2), ce(0.1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 10 + rng() % 80;
    std::vector<double> t(n);
    std::vector<bool> e(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = ev(rng), c = ce(rng);
      t[i] = std::min(a, c);
      e[i] = a <= c;
    }
    const auto km = km_estimate(test::make_records(t, e));
    double prev = 1.0;
    std::size_t seen = 0;
    for (const auto& p : km.points) {
      CHECK(p.survival <= prev);
      CHECK(p.survival >= 0.0);
      CHECK(p.ci_low <= p.survival + 1e-15);
      CHECK(p.ci_high >= p.survival - 1e-15);
      CHECK(p.at_risk == n - seen);
      seen += p.events + p.censored;
      prev = p.survival;
    }
    CHECK(seen == n);
  }
  CHECK_THROWS_AS(km_estimate(std::vector<SurvivalRecord>{}), InputError);
  CHECK_THROWS_AS(km_estimate(test::make_records({-1.0}, {true})), InputError);
  CHECK_FALSE(km_estimate(test::make_records({1, 2}, {false, false})).median.has_value());
}

TEST_CASE("log-rank") {
  SUBCASE("identical groups give zero") {
    const auto g = test::make_records({1, 2, 3, 4}, {true, true, false, true});
    const std::vector<std::vector<SurvivalRecord>> groups = {g, g};
    const auto lr = logrank(groups);
    CHECK(lr.chi_square == doctest::Approx(0.0).scale(1.0));
    CHECK(lr.df == 1);
    CHECK(lr.p_value == doctest::Approx(1.0));
  }
  SUBCASE("hand computation") {
    // A: 1, 3 (events); B: 2 (event), 4 (censored)
    // t=1: n=4, nA=2, O-E = 1 - 0.5, V = 2*2*1*3 / (16*3) = 0.25
    // t=2: n=3, nA=1, O-E = 0 - 1/3, V = 1*2*1*2 / (9*2) = 2/9
    // t=3: n=2, nA=1, O-E = 1 - 0.5, V = 1*1*1*1 / (4*1) = 0.25
    const std::vector<std::vector<SurvivalRecord>> groups = {
        test::make_records({1, 3}, {true, true}), test::make_records({2, 4}, {true, false})};
    const double num = 0.5 - 1.0 / 3.0 + 0.5;
    const double var = 0.25 + 2.0 / 9.0 + 0.25;
    const auto lr = logrank(groups);
    CHECK(lr.chi_square == doctest::Approx(num * num / var).epsilon(1e-12));
    CHECK(lr.observed[0] == 2.0);
    CHECK(lr.expected[0] == doctest::Approx(0.5 + 1.0 / 3.0 + 0.5));
  }
  SUBCASE("separated groups are significant and three groups give df 2") {
    std::vector<double> early, late;
    for (int i = 0; i < 30; ++i) {
      early.push_back(1 + i * 0.1);
      late.push_back(10 + i * 0.1);
    }
    const std::vector<std::vector<SurvivalRecord>> groups = {
        test::make_records(early, std::vector<bool>(30, true)),
        test::make_records(late, std::vector<bool>(30, true))};
    CHECK(logrank(groups).p_value < 1e-6);
    auto three = groups;
    three.push_back(test::make_records({5, 6, 7}, {true, true, true}));
    CHECK(logrank(three).df == 2);
  }
  const std::vector<std::vector<SurvivalRecord>> single = {test::make_records({1}, {true})};
  CHECK_THROWS_AS(logrank(single), InputError);
}

TEST_CASE("AUC equals pair counting") {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + rng() % 60;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng() % 10);
      y[i] = rng() % 3 == 0;
    }
    y[0] = true;
    y[1] = false;
    CHECK(auc(s, y) == doctest::Approx(pair_count_auc(s, y)).epsilon(1e-12));
  }
  const std::vector<double> sep = {0.9, 0.8, 0.2, 0.1};
  CHECK(auc(sep, {true, true, false, false}) == 1.0);
  CHECK(auc(sep, {false, false, true, true}) == 0.0);
  const std::vector<double> same = {1, 1, 1, 1};
  CHECK(auc(same, {true, false, true, false}) == 0.5);
  CHECK_THROWS_AS(auc(sep, {true, true, true, true}), InputError);
}

TEST_CASE("AUC bootstrap interval") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> s(120);
  std::vector<bool> y(120);
  for (std::size_t i = 0; i < 120; ++i) {
    y[i] = i % 3 == 0;
    s[i] = nd(rng) + (y[i] ? 1.0 : 0.0);
  }
  const auto r = auc_with_ci(s, y, {0.95, 500, 1, 1});
  CHECK(r.n_positive == 40);
  CHECK(r.n_negative == 80);
  CHECK(r.auc == auc(s, y));
  CHECK(r.ci.low < r.auc);
  CHECK(r.ci.high > r.auc);
  CHECK(auc_with_ci(s, y, {0.95, 500, 1, 3}).ci == r.ci);
}

TEST_CASE("cohort CSV") {
  const std::string text =
      "subject_id,time_years,event,ci,age\n"
      "a,1.5,1,3,40\n"
      "b,2,0,7,55.5\n";
  const Cohort c = parse_cohort_csv(text);
  CHECK(c.covariate_names == std::vector<std::string>{"ci", "age"});
  REQUIRE(c.records.size() == 2);
  CHECK(c.records[1].event == false);
  CHECK(c.covariate("age") == std::vector<double>{40, 55.5});
  std::ostringstream out;
  write_cohort_csv(c, out);
  CHECK(parse_cohort_csv(out.str()) == c);
  CHECK_THROWS_AS(c.covariate_index("bmi"), InputError);
  CHECK_THROWS_AS(parse_cohort_csv("subject_id,time_years,event\na,1,2\n"), InputError);
  CHECK_THROWS_AS(parse_cohort_csv("subject_id,time_years,event\na,-1,1\n"), InputError);
  CHECK_THROWS_AS(parse_cohort_csv("subject_id,time_years,event,x\na,1,1\n"), ParseError);
  CHECK_THROWS_AS(parse_cohort_csv("id,t\n"), ParseError);
}
