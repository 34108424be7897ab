#include "clustreg/error.hpp"
#include "clustreg/tuning.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace clustreg;
using namespace clustreg::testing;

namespace {

Generated fixture(std::uint64_t seed, Index n, int groups) {
  std::mt19937_64 rng(seed);
  return random_mixture(rng, n, groups, 2);
}

double row_max(const CvReport& r) {
  double best = -INFINITY;
  for (const CvRow& row : r.rows) best = std::max(best, row.cv_loglik);
  return best;
}

}  // namespace

TEST_SUITE("tuning") {

TEST_CASE("grid and repeat defaults") {
  const std::vector<double> g = CvConfig::default_c_grid();
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(g.back() == 1.0);
  for (std::size_t k = 1; k < g.size(); ++k) {
    CHECK(g[k] > g[k - 1]);
    CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(1000.0, 1.0 / 19.0)).epsilon(1e-12));
  }
  CvConfig cv;
  CHECK(cv.repeats_for(100) == 20);
  CHECK(cv.repeats_for(56) == 12);
  CHECK(cv.test_size(10) == 1);
  CHECK(cv.test_size(56) == 5);
  cv.test_fraction = 0.3;
  CHECK(cv.test_size(10) == 3);
  cv.n_repeats = 4;
  CHECK(cv.repeats_for(1000) == 4);
}

TEST_CASE("config validation") {
  CvConfig cv;
  CHECK_NOTHROW(cv.validate(50));
  CHECK_THROWS_AS(cv.validate(9), Error);
  cv.c_grid = {};
  CHECK_THROWS_AS(cv.validate(50), Error);
  cv.c_grid = {0.5, 0.2};
  CHECK_THROWS_AS(cv.validate(50), Error);
  cv.c_grid = {0.5, 1.5};
  CHECK_THROWS_AS(cv.validate(50), Error);
  cv.c_grid = {0.5};
  cv.test_fraction = 1.0;
  CHECK_THROWS_AS(cv.validate(50), Error);
}

TEST_CASE("train/test splits") {
  SUBCASE("sizes") {
    Rng rng(1);
    const Split s = make_split(10, 0.1, rng);
    CHECK(s.test.size() == 1);
    CHECK(s.train.size() == 9);
  }
  SUBCASE("partition property") {
    Rng rng(2);
    for (int rep = 0; rep < 500; ++rep) {
      const Index n = 5 + rep % 97;
      const double frac = 0.05 + 0.9 * (rep % 17) / 17.0;
      if (std::floor(n * frac + 1e-9) < 1) continue;
      const Split s = make_split(n, frac, rng);
      std::vector<Index> all = s.train;
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      std::vector<Index> expect(static_cast<std::size_t>(n));
      std::iota(expect.begin(), expect.end(), Index{0});
      REQUIRE(all == expect);
      REQUIRE(std::is_sorted(s.test.begin(), s.test.end()));
      REQUIRE(std::is_sorted(s.train.begin(), s.train.end()));
    }
  }
  SUBCASE("deterministic in the generator state") {
    Rng a(77), b(77);
    for (int rep = 0; rep < 10; ++rep) {
      const Split x = make_split(40, 0.25, a);
      const Split y = make_split(40, 0.25, b);
      CHECK(x.test == y.test);
    }
  }
  SUBCASE("roughly uniform test membership") {
    Rng rng(3);
    std::vector<int> hits(20, 0);
    for (int rep = 0; rep < 20000; ++rep) {
      for (Index i : make_split(20, 0.1, rng).test) ++hits[static_cast<std::size_t>(i)];
    }
    for (int h : hits) CHECK(std::abs(h - 2000) < 200);
  }
  SUBCASE("too small a training part") {
    Rng rng(4);
    CHECK_THROWS_AS(make_split(10, 0.5, rng, 6), Error);
    CHECK_THROWS_AS(make_split(5, 0.1, rng), Error);
  }
  SUBCASE("shared sequence across calls") {
    CvConfig cv;
    cv.seed = 123;
    const auto a = cv_splits(60, cv);
    const auto b = cv_splits(60, cv);
    REQUIRE(a.size() == 12);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].test == b[k].test);
    cv.seed = 124;
    const auto c = cv_splits(60, cv);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) differs = differs || a[k].test != c[k].test;
    CHECK(differs);
  }
}

TEST_CASE("cross-validated log-likelihood") {
  EmConfig em;
  SUBCASE("matches a naive re-implementation of the loop") {
    const Generated g = fixture(5, 60, 2);
    CvConfig cv;
    cv.seed = 42;
    const double target = homoscedastic_target(g.data, 2, em, 5, 9);
    for (double c : {0.01, 0.3, 1.0}) {
      const ConstraintSpec spec = ConstraintSpec::constrained(c, target);
      const ModelParams warm = multi_start_fit(g.data, 2, spec, em, 5, 11).params;
      const CvScore got = cv_loglik(g.data, 2, c, warm, target, cv, em);

      double expect = 0.0;
      const auto splits = cv_splits(60, cv, 2 * 3);
      REQUIRE(splits.size() == 12);
      for (const Split& s : splits) {
        REQUIRE(s.test.size() == 6);
        const FitResult f = run_em(g.data.subset(s.train), 2, spec, em, warm);
        for (Index i : s.test) {
          double mix = 0.0;
          for (Index k = 0; k < 2; ++k) {
            mix += f.params.weights(k) *
                   component_density(g.data.responses()(i), g.data.design().row(i).transpose(),
                                     f.params.coefficients.row(k).transpose(),
                                     f.params.variances(k));
          }
          expect += std::log(mix);
        }
      }
      CHECK(got.value == doctest::Approx(expect).epsilon(1e-12));
      CHECK(got.failed_fits == 0);
    }
  }
  SUBCASE("one repeat with one test point") {
    const Generated g = fixture(6, 10, 1);
    CvConfig cv;
    cv.n_repeats = 1;
    cv.seed = 8;
    const ModelParams warm =
        multi_start_fit(g.data, 1, ConstraintSpec::homoscedastic(), em, 1, 1).params;
    const CvScore got = cv_loglik(g.data, 1, 0.5, warm, 1.0, cv, em);
    const Split s = cv_splits(10, cv, 3).front();
    REQUIRE(s.test.size() == 1);
    const FitResult f = run_em(g.data.subset(s.train), 1, ConstraintSpec::constrained(0.5, 1.0), em, warm);
    const Index i = s.test.front();
    CHECK(got.value == doctest::Approx(log_component_density(
                                           g.data.responses()(i), g.data.design().row(i).transpose(),
                                           f.params.coefficients.row(0).transpose(),
                                           f.params.variances(0)))
                           .epsilon(1e-13));
  }
  SUBCASE("a single component ignores c") {
    const Generated g = fixture(7, 50, 1);
    CvConfig cv;
    cv.seed = 3;
    const CvReport r = select_c(g.data, 1, cv, em, 3);
    for (const CvRow& row : r.rows) CHECK(row.cv_loglik == r.rows.front().cv_loglik);
    CHECK(r.selected_c == 1.0);
  }
}

TEST_CASE("row selection") {
  std::vector<CvRow> rows{{0.1, -5.0, 0, 0}, {0.5, -3.0, 0, 0}, {1.0, -4.0, 0, 0}};
  CHECK(best_row(rows) == 1);
  rows[2].cv_loglik = -3.0;
  CHECK(best_row(rows) == 2);
  std::vector<CvRow> flat{{0.1, -2.0, 0, 0}, {0.2, -2.0, 0, 0}, {0.3, -2.0, 0, 0}};
  CHECK(best_row(flat) == 2);
  CHECK(best_row({{0.7, -1.0, 0, 0}}) == 0);
  CHECK_THROWS_AS(best_row({}), Error);
}

TEST_CASE("c selection") {
  EmConfig em;
  const Generated g = fixture(9, 80, 2);
  CvConfig cv;
  cv.seed = 21;
  cv.c_grid = CvConfig::log_grid(1e-3, 1.0, 6);
  const CvReport r = select_c(g.data, 2, cv, em, 4);
  REQUIRE(r.rows.size() == 6);
  REQUIRE(r.warm_start_params.size() == 6);
  CHECK(std::find(cv.c_grid.begin(), cv.c_grid.end(), r.selected_c) != cv.c_grid.end());
  CHECK(r.rows[best_row(r.rows)].cv_loglik == row_max(r));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(r.rows[k].c == cv.c_grid[k]);
    const ConstraintSpec s = ConstraintSpec::constrained(cv.c_grid[k], r.target_variance);
    CHECK(s.feasible(r.warm_start_params[k].variances));
  }

  SUBCASE("deterministic") {
    const CvReport again = select_c(g.data, 2, cv, em, 4);
    for (std::size_t k = 0; k < 6; ++k) CHECK(again.rows[k].cv_loglik == r.rows[k].cv_loglik);
  }
  SUBCASE("refining the grid never lowers the best score") {
    CvConfig finer = cv;
    finer.c_grid = CvConfig::log_grid(1e-3, 1.0, 11);
    std::set<double> merged(cv.c_grid.begin(), cv.c_grid.end());
    merged.insert(finer.c_grid.begin(), finer.c_grid.end());
    finer.c_grid.assign(merged.begin(), merged.end());
    const CvReport fine = select_c_with_target(g.data, 2, r.target_variance, finer, em, 4);
    CHECK(row_max(fine) >= row_max(r));
  }
  SUBCASE("singleton grid") {
    CvConfig one = cv;
    one.c_grid = {0.37};
    CHECK(select_c(g.data, 2, one, em, 4).selected_c == 0.37);
  }
}

TEST_CASE("conc fit at c = 1 is the homoscedastic fit") {
  EmConfig em;
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const Generated g = fixture(seed, 70, 2);
    CvConfig cv;
    cv.seed = seed;
    cv.c_grid = {1.0};
    const auto [fit, report] = fit_conc(g.data, 2, cv, em, 6);
    CHECK(report.selected_c == 1.0);
    const FitResult hom =
        multi_start_fit(g.data, 2, ConstraintSpec::homoscedastic(), em, 6, derive_seed(seed, 1));
    CHECK(report.target_variance == hom.params.variances(0));
    CHECK(std::abs(fit.loglik - hom.loglik) < 1e-6);
  }
}

}  // TEST_SUITE
