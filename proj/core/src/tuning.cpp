#include "clustreg/tuning.hpp"

#include "clustreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clustreg {

std::vector<double> CvConfig::log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw Error(ErrorKind::invalid_argument, "invalid log grid");
  }
  std::vector<double> grid;
  if (points == 1) return {hi};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int k = 0; k < points; ++k) {
    grid.push_back(std::exp(a + (b - a) * k / (points - 1)));
  }
  grid.back() = hi;
  return grid;
}

std::vector<double> CvConfig::default_c_grid() { return log_grid(1e-3, 1.0, 20); }

int CvConfig::repeats_for(Index n) const {
  if (n_repeats > 0) return n_repeats;
  return static_cast<int>((n + 4) / 5);
}

Index CvConfig::test_size(Index n) const {
  // The epsilon keeps products such as 0.3 * 10 from flooring to 2.
  return static_cast<Index>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
}

void CvConfig::validate(Index n) const {
  if (c_grid.empty()) {
    throw Error(ErrorKind::invalid_argument, "c grid is empty");
  }
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    if (!(c_grid[k] > 0.0 && c_grid[k] <= 1.0)) {
      throw Error(ErrorKind::invalid_argument, "c grid values must lie in (0, 1]");
    }
    if (k > 0 && !(c_grid[k] > c_grid[k - 1])) {
      throw Error(ErrorKind::invalid_argument, "c grid must be strictly increasing");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "test_fraction must lie in (0, 1)");
  }
  if (n_repeats < 0) {
    throw Error(ErrorKind::invalid_argument, "n_repeats must be >= 0");
  }
  if (test_size(n) < 1) {
    throw Error(ErrorKind::invalid_argument,
                "test set would be empty for n = " + std::to_string(n));
  }
}

Split make_split(Index n, double test_fraction, Rng& rng, Index min_train) {
  const Index test_n =
      static_cast<Index>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
  if (test_n < 1) {
    throw Error(ErrorKind::invalid_argument, "test set would be empty");
  }
  if (n - test_n < min_train) {
    throw Error(ErrorKind::invalid_argument,
                "test set of " + std::to_string(test_n) + " leaves fewer than " +
                    std::to_string(min_train) + " training observations");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Partial Fisher-Yates: the first test_n entries form a uniform subset.
  for (Index k = 0; k < test_n; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(order[static_cast<std::size_t>(k)],
              order[static_cast<std::size_t>(pick(rng))]);
  }
  Split s;
  s.test.assign(order.begin(), order.begin() + test_n);
  s.train.assign(order.begin() + test_n, order.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<Split> cv_splits(Index n, const CvConfig& cv, Index min_train) {
  Rng rng(derive_seed(cv.seed, 0x5eed));
  std::vector<Split> splits;
  const int k = cv.repeats_for(n);
  splits.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    splits.push_back(make_split(n, cv.test_fraction, rng, min_train));
  }
  return splits;
}

CvScore cv_loglik(const Dataset& data, int n_components, double c,
                  const ModelParams& warm_start, double target, const CvConfig& cv,
                  const EmConfig& em) {
  cv.validate(data.size());
  const ConstraintSpec spec = ConstraintSpec::constrained(c, target);
  const Index min_train = static_cast<Index>(n_components) * (data.n_features() + 1);

  CvScore score;
  for (const Split& split : cv_splits(data.size(), cv, min_train)) {
    const Dataset train = data.subset(split.train);
    const Dataset test = data.subset(split.test);
    double contribution = 0.0;
    try {
      const FitResult fit = run_em(train, n_components, spec, em, warm_start);
      if (fit.degenerate) ++score.degenerate_fits;
      contribution = log_likelihood(test, fit.params);
    } catch (const Error&) {
      ++score.failed_fits;
      contribution = log_likelihood(test, warm_start);
    }
    score.value += contribution;
  }
  return score;
}

std::size_t best_row(const std::vector<CvRow>& rows) {
  if (rows.empty()) {
    throw Error(ErrorKind::invalid_argument, "no cross-validation rows");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const CvRow& r = rows[k];
    const CvRow& b = rows[best];
    if (r.cv_loglik > b.cv_loglik || (r.cv_loglik == b.cv_loglik && r.c > b.c)) {
      best = k;
    }
  }
  return best;
}

double homoscedastic_target(const Dataset& data, int n_components, const EmConfig& em,
                            int n_starts, std::uint64_t seed) {
  const FitResult hom = multi_start_fit(data, n_components, ConstraintSpec::homoscedastic(),
                                        em, n_starts, seed);
  return hom.params.variances(0);
}

namespace {

std::uint64_t target_seed(const CvConfig& cv) { return derive_seed(cv.seed, 1); }
std::uint64_t warm_seed(const CvConfig& cv) { return derive_seed(cv.seed, 2); }

}  // namespace

CvReport select_c_with_target(const Dataset& data, int n_components, double target,
                              const CvConfig& cv, const EmConfig& em, int n_starts) {
  cv.validate(data.size());
  const std::size_t m = cv.c_grid.size();

  CvReport report;
  report.target_variance = target;
  report.rows.resize(m);
  report.warm_start_params.resize(m);

  parallel_for(m, [&](std::size_t k) {
    const double c = cv.c_grid[k];
    CvRow& row = report.rows[k];
    row.c = c;
    try {
      const ConstraintSpec spec = ConstraintSpec::constrained(c, target);
      FitResult warm = multi_start_fit(data, n_components, spec, em, n_starts, warm_seed(cv));
      const CvScore s = cv_loglik(data, n_components, c, warm.params, target, cv, em);
      row.cv_loglik = s.value;
      row.degenerate_fits = s.degenerate_fits;
      row.failed_fits = s.failed_fits;
      report.warm_start_params[k] = std::move(warm.params);
    } catch (const Error&) {
      row.cv_loglik = -std::numeric_limits<double>::infinity();
      row.failed_fits = cv.repeats_for(data.size());
    }
  });

  const bool any_ok = std::any_of(report.rows.begin(), report.rows.end(), [](const CvRow& r) {
    return r.cv_loglik > -std::numeric_limits<double>::infinity();
  });
  if (!any_ok) {
    throw Error(ErrorKind::numerical, "every grid value failed to produce a warm start");
  }
  report.selected_c = report.rows[best_row(report.rows)].c;
  return report;
}

CvReport select_c(const Dataset& data, int n_components, const CvConfig& cv,
                  const EmConfig& em, int n_starts) {
  cv.validate(data.size());
  const double target = homoscedastic_target(data, n_components, em, n_starts, target_seed(cv));
  return select_c_with_target(data, n_components, target, cv, em, n_starts);
}

std::pair<FitResult, CvReport> fit_conc(const Dataset& data, int n_components,
                                        const CvConfig& cv, const EmConfig& em,
                                        int n_starts) {
  CvReport report = select_c(data, n_components, cv, em, n_starts);
  const ConstraintSpec spec =
      ConstraintSpec::constrained(report.selected_c, report.target_variance);
  FitResult fit = multi_start_fit(data, n_components, spec, em, n_starts, warm_seed(cv));
  return {std::move(fit), std::move(report)};
}

}  // namespace clustreg
