#pragma once

#include "clustreg/em.hpp"

#include <span>
#include <vector>

namespace clustreg {

/// Hubert-Arabie adjusted Rand index. Pair counts are accumulated in exact
/// integer arithmetic. Two trivial partitions that agree (both one cluster,
/// or both all singletons) score 1.
double adjusted_rand(std::span<const int> labels_a, std::span<const int> labels_b);

struct MseReport {
  double avg_mse_beta = 0.0;
  double avg_mse_sigma = 0.0;
  /// Same matching, squared errors of standard deviations instead of variances.
  double avg_mse_sd = 0.0;
  /// estimate component matched to truth component g.
  std::vector<int> matching_permutation;
};

/// Parameter recovery error under the component permutation minimizing the
/// total squared coefficient error (exhaustive search over G!).
MseReport param_mse(const ModelParams& truth, const ModelParams& estimate);

enum class BicConvention {
  /// -2 log L + q log n with the full Gaussian log-likelihood.
  full,
  /// Same, but log L excludes the -n/2 log(2 pi) normalizing constant.
  kernel,
};

struct BicValue {
  double value = 0.0;
  /// False for degenerate or unconverged fits.
  bool reliable = true;
  int n_parameters = 0;
};

/// Free parameters: (G-1) + G*J + G for hetn, (G-1) + G*J + 1 for homn.
/// conc has no defined count and is rejected.
int bic_parameter_count(Variant variant, int n_components, int n_features);

BicValue bic(const FitResult& fit, Index n, Variant variant, int n_components,
             int n_features, BicConvention convention = BicConvention::full);

}  // namespace clustreg
