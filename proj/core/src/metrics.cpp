#include "clustreg/metrics.hpp"

#include "clustreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace clustreg {

namespace {

__extension__ typedef __int128 Wide;

Wide pairs(Wide k) { return k * (k - 1) / 2; }

}  // namespace

double adjusted_rand(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw Error(ErrorKind::dimension_mismatch, "partitions have different lengths");
  }
  if (labels_a.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "adjusted Rand needs at least two items");
  }

  std::map<std::pair<int, int>, Wide> cells;
  std::map<int, Wide> rows;
  std::map<int, Wide> cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++cells[{labels_a[i], labels_b[i]}];
    ++rows[labels_a[i]];
    ++cols[labels_b[i]];
  }
  Wide index = 0;
  for (const auto& [key, count] : cells) index += pairs(count);
  Wide a = 0;
  for (const auto& [key, count] : rows) a += pairs(count);
  Wide b = 0;
  for (const auto& [key, count] : cols) b += pairs(count);
  const Wide total = pairs(static_cast<Wide>(labels_a.size()));

  // ARI = (index - a b / total) / ((a + b) / 2 - a b / total), scaled by 2 total.
  const Wide num = 2 * (index * total - a * b);
  const Wide den = (a + b) * total - 2 * a * b;
  if (den == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

MseReport param_mse(const ModelParams& truth, const ModelParams& estimate) {
  const Index g_count = truth.n_components();
  const Index j = truth.n_features();
  if (estimate.n_components() != g_count || estimate.n_features() != j ||
      truth.variances.size() != g_count || estimate.variances.size() != g_count) {
    throw Error(ErrorKind::dimension_mismatch, "parameter sets differ in G or J");
  }

  std::vector<int> perm(static_cast<std::size_t>(g_count));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_sse = std::numeric_limits<double>::infinity();
  do {
    double sse = 0.0;
    for (Index g = 0; g < g_count; ++g) {
      sse += (truth.coefficients.row(g) - estimate.coefficients.row(perm[static_cast<std::size_t>(g)]))
                 .squaredNorm();
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  MseReport out;
  out.matching_permutation = best;
  double sigma_sse = 0.0;
  double sd_sse = 0.0;
  for (Index g = 0; g < g_count; ++g) {
    const double est = estimate.variances(best[static_cast<std::size_t>(g)]);
    const double d = truth.variances(g) - est;
    const double e = std::sqrt(truth.variances(g)) - std::sqrt(est);
    sigma_sse += d * d;
    sd_sse += e * e;
  }
  out.avg_mse_beta = best_sse / static_cast<double>(g_count * j);
  out.avg_mse_sigma = sigma_sse / static_cast<double>(g_count);
  out.avg_mse_sd = sd_sse / static_cast<double>(g_count);
  return out;
}

int bic_parameter_count(Variant variant, int n_components, int n_features) {
  const int g = n_components;
  switch (variant) {
    case Variant::hetn: return (g - 1) + g * n_features + g;
    case Variant::homn: return (g - 1) + g * n_features + 1;
    case Variant::conc: break;
  }
  throw Error(ErrorKind::invalid_argument,
              "BIC is not defined for the constrained estimator");
}

BicValue bic(const FitResult& fit, Index n, Variant variant, int n_components,
             int n_features, BicConvention convention) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be >= 1");
  BicValue out;
  out.n_parameters = bic_parameter_count(variant, n_components, n_features);
  double loglik = fit.loglik;
  if (convention == BicConvention::kernel) {
    loglik += 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  }
  out.value = -2.0 * loglik + out.n_parameters * std::log(static_cast<double>(n));
  out.reliable = !fit.degenerate && fit.converged;
  return out;
}

}  // namespace clustreg
