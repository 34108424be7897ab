#include "clustreg/error.hpp"
#include "clustreg/simulation.hpp"
#include "support.hpp"

#include <boost/math/distributions/inverse_gamma.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace clustreg;
using namespace clustreg::testing;

TEST_SUITE("simulation") {

TEST_CASE("scenario validation") {
  ScenarioSpec s;
  CHECK_NOTHROW(s.validate());
  s.mixing = {0.5, 0.6};
  CHECK_THROWS_AS(s.validate(), Error);
  s = ScenarioSpec{};
  s.intercepts = {1.0};
  CHECK_THROWS_AS(s.validate(), Error);
  s = ScenarioSpec{};
  s.variance_shape = 1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = ScenarioSpec{};
  s.n = 5;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("inverse-gamma draws") {
  Rng rng(7);
  const int n = 100000;
  std::vector<double> draws(n);
  for (double& d : draws) d = draw_inverse_gamma(3.0, 1.0, rng);
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n;
  CHECK(std::abs(mean - 0.5) < 0.02);

  // Quantile-transform sampler as the reference distribution.
  const boost::math::inverse_gamma_distribution<double> ig(3.0, 1.0);
  CHECK(boost::math::mean(ig) == doctest::Approx(0.5));
  Rng ref_rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double ref_mean = 0.0;
  for (int i = 0; i < n; ++i) ref_mean += boost::math::quantile(ig, u(ref_rng));
  ref_mean /= n;
  CHECK(std::abs(mean - ref_mean) < 0.02);

  // Kolmogorov-Smirnov distance to the exact CDF; 1% critical value ~ 1.63/sqrt(n)
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = boost::math::cdf(ig, draws[static_cast<std::size_t>(i)]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n),
                   std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));

  // shape 5, scale 2: mean 0.5 as well
  Rng rng2(9);
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) m2 += draw_inverse_gamma(5.0, 2.0, rng2);
  CHECK(std::abs(m2 / n - 0.5) < 0.01);
}

TEST_CASE("scenario draws") {
  SUBCASE("noiseless limit lies on the component hyperplanes") {
    ScenarioSpec s;
    s.variance_multiplier = 1e-300;
    Rng rng(1);
    const SimulatedSample x = draw_scenario(s, rng);
    for (Index i = 0; i < x.data.size(); ++i) {
      const int g = x.labels[static_cast<std::size_t>(i)];
      const double fit = x.data.design().row(i).dot(x.truth.coefficients.row(g));
      CHECK(std::abs(x.data.responses()(i) - fit) < 1e-12 * (1.0 + std::abs(fit)));
    }
  }
  SUBCASE("regressor means and mixing proportions") {
    ScenarioSpec s;
    s.n = 100000;
    s.mixing = {0.2, 0.3, 0.5};
    s.intercepts = {4, 9, 16};
    Rng rng(2);
    const SimulatedSample x = draw_scenario(s, rng);
    REQUIRE(x.data.n_features() == 4);
    CHECK((x.data.design().col(0).array() == 1.0).all());
    for (Index k = 1; k < 4; ++k) CHECK(std::abs(x.data.design().col(k).mean()) < 0.02);
    std::vector<double> counts(3, 0.0);
    for (int l : x.labels) counts[static_cast<std::size_t>(l)] += 1.0;
    for (std::size_t g = 0; g < 3; ++g) CHECK(std::abs(counts[g] / s.n - s.mixing[g]) < 0.01);
    for (int g = 0; g < 3; ++g) {
      CHECK(x.truth.coefficients(g, 0) == s.intercepts[static_cast<std::size_t>(g)]);
      for (Index k = 1; k < 4; ++k) {
        CHECK(x.truth.coefficients(g, k) >= -1.5);
        CHECK(x.truth.coefficients(g, k) <= 1.5);
      }
    }
  }
  SUBCASE("every component is populated") {
    ScenarioSpec s;
    s.n = 12;
    s.mixing = {0.05, 0.95};
    s.n_regressors = 1;
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
      const SimulatedSample x = draw_scenario(s, rng);
      CHECK(std::count(x.labels.begin(), x.labels.end(), 0) > 0);
    }
  }
  SUBCASE("deterministic in the generator") {
    ScenarioSpec s;
    Rng a(4), b(4);
    const SimulatedSample x = draw_scenario(s, a);
    const SimulatedSample y = draw_scenario(s, b);
    CHECK(x.data.responses() == y.data.responses());
    CHECK(x.truth.variances == y.truth.variances);
    CHECK(x.labels == y.labels);
  }
}

TEST_CASE("study runner") {
  StudyConfig cfg;
  ScenarioSpec quiet;
  quiet.name = "quiet";
  quiet.variance_multiplier = 1e-6;
  quiet.seed = 5;
  cfg.scenarios = {quiet};
  cfg.replications = 1;
  cfg.n_starts = 5;
  cfg.cv.c_grid = CvConfig::log_grid(1e-3, 1.0, 5);

  SUBCASE("well separated noiseless groups are recovered exactly") {
    const StudyResult r = run_study(cfg);
    REQUIRE(r.rows.size() == 3);
    for (const StudyRow& row : r.rows) {
      CAPTURE(to_string(row.estimator));
      CHECK(row.n_ok == 1);
      CHECK(row.adj_rand == 1.0);
      CHECK(row.mse_beta < 1e-6);
    }
    CHECK(std::isnan(r.rows[0].mean_c));
    CHECK(r.rows[2].estimator == Variant::conc);
    CHECK(r.rows[2].mean_c > 0.0);
  }
  SUBCASE("one row per scenario and estimator, deterministic") {
    ScenarioSpec second;
    second.name = "three";
    second.mixing = {0.2, 0.3, 0.5};
    second.intercepts = {4, 9, 16};
    second.seed = 6;
    cfg.scenarios.push_back(second);
    cfg.replications = 2;
    cfg.estimators = {Variant::hetn, Variant::conc};
    const StudyResult a = run_study(cfg);
    const StudyResult b = run_study(cfg);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.rows[0].scenario == "quiet");
    CHECK(a.rows[1].estimator == Variant::conc);
    CHECK(a.rows[2].scenario == "three");
    CHECK(a.records.size() == 8);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      CHECK(a.rows[k].mse_beta == b.rows[k].mse_beta);
      CHECK(a.rows[k].adj_rand == b.rows[k].adj_rand);
      CHECK(a.rows[k].mse_sigma == b.rows[k].mse_sigma);
    }
    const auto single = run_replication(cfg, 1, 1);
    CHECK(single.size() == 2);
    CHECK(single[0].mse_beta == a.records[6].mse_beta);
  }
}

}  // TEST_SUITE
