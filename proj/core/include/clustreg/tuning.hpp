#pragma once

#include "clustreg/em.hpp"
#include "clustreg/parallel.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace clustreg {

struct CvConfig {
  /// Number of random train/test splits K. 0 means ceil(n / 5).
  int n_repeats = 0;
  double test_fraction = 0.1;
  std::vector<double> c_grid = default_c_grid();
  std::uint64_t seed = 0;

  /// 20 log-spaced points from 1e-3 to 1.
  static std::vector<double> default_c_grid();
  static std::vector<double> log_grid(double lo, double hi, int points);

  int repeats_for(Index n) const;
  Index test_size(Index n) const;
  void validate(Index n) const;
};

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

struct CvRow {
  double c = 0.0;
  double cv_loglik = 0.0;
  int degenerate_fits = 0;
  int failed_fits = 0;
};

struct CvReport {
  std::vector<CvRow> rows;
  double selected_c = 1.0;
  double target_variance = 0.0;
  std::vector<ModelParams> warm_start_params;
};

/// Uniform random test subset of size floor(n * test_fraction); the rest is
/// the training set. Both parts are returned sorted.
Split make_split(Index n, double test_fraction, Rng& rng, Index min_train = 1);

/// Split sequence shared by every grid value (common random numbers).
std::vector<Split> cv_splits(Index n, const CvConfig& cv, Index min_train = 1);

struct CvScore {
  double value = 0.0;
  int degenerate_fits = 0;
  int failed_fits = 0;
};

/// Sum over K splits of the test log-likelihood of a ConC fit trained from
/// `warm_start`. A training fit that throws is scored with the warm start.
CvScore cv_loglik(const Dataset& data, int n_components, double c,
                  const ModelParams& warm_start, double target,
                  const CvConfig& cv, const EmConfig& em);

/// Index of the best row: maximal cv_loglik, ties toward the largest c.
std::size_t best_row(const std::vector<CvRow>& rows);

CvReport select_c(const Dataset& data, int n_components, const CvConfig& cv,
                  const EmConfig& em, int n_starts);

/// Same as select_c with the homoscedastic target supplied by the caller.
CvReport select_c_with_target(const Dataset& data, int n_components,
                              double target, const CvConfig& cv,
                              const EmConfig& em, int n_starts);

/// Homoscedastic target: the common variance of a multi-start HomN fit.
double homoscedastic_target(const Dataset& data, int n_components,
                            const EmConfig& em, int n_starts,
                            std::uint64_t seed);

std::pair<FitResult, CvReport> fit_conc(const Dataset& data, int n_components,
                                        const CvConfig& cv, const EmConfig& em,
                                        int n_starts);

}  // namespace clustreg
