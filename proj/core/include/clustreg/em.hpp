#pragma once

#include "clustreg/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clustreg {

/// Estimator variants.
///   hetn: free per-component variances
///   homn: one shared variance
///   conc: variances clamped to [target*sqrt(c), target/sqrt(c)]; a single
///         component is left unclamped
enum class Variant { hetn, homn, conc };

const char* to_string(Variant v) noexcept;
/// Accepts "hetn", "homn", "conc" in any case; throws on anything else.
Variant parse_variant(const std::string& text);

class ConstraintSpec {
 public:
  static ConstraintSpec heteroscedastic();
  static ConstraintSpec homoscedastic();
  /// c in (0, 1], target > 0.
  static ConstraintSpec constrained(double c, double target_variance);

  Variant variant() const noexcept { return variant_; }
  /// Only meaningful for conc; 1 elsewhere.
  double c() const noexcept { return c_; }
  double target_variance() const noexcept { return target_; }
  double lower_bound() const noexcept { return lower_; }
  double upper_bound() const noexcept { return upper_; }

  /// True when every variance lies in [lower, upper] up to a relative slack.
  bool feasible(const Eigen::Ref<const Eigen::VectorXd>& variances,
                double rel_slack = 1e-12) const;

 private:
  ConstraintSpec() = default;

  Variant variant_ = Variant::hetn;
  double c_ = 1.0;
  double target_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

struct EmConfig {
  int max_iterations = 500;
  /// Stop when |L_k - L_{k-1}| < tolerance * |L_{k-1}|.
  double tolerance = 1e-8;
  /// Absolute HetN degeneracy threshold. When unset, 1e-10 times the sample
  /// variance of the responses.
  std::optional<double> variance_floor;

  void validate() const;
  double floor_for(const Dataset& data) const;
};

struct StartSummary {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double loglik = 0.0;
  bool degenerate = false;
  bool converged = false;
  int iterations = 0;
  double min_variance = 0.0;
};

struct FitResult {
  ModelParams params;
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  Responsibilities responsibilities;
  std::vector<int> labels;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;

  /// Populated by multi_start_fit: one entry per start, in start order.
  std::vector<StartSummary> starts;
  /// Index into `starts` of the returned solution.
  int best_start = 0;
};

// Single EM pieces ------------------------------------------------------------

Responsibilities e_step(const Dataset& data, const ModelParams& params);

Eigen::VectorXd m_step_weights(const Responsibilities& resp);

/// Weighted least squares per component (G x J). Solves through a QR
/// factorization of the sqrt-weighted design. Throws ComponentError
/// (singular_component) when the weighted mass is below J or the weighted
/// cross-product matrix has condition number above 1e12.
Eigen::MatrixXd m_step_betas(const Dataset& data, const Responsibilities& resp);

/// Weighted mean squared residual per component. Zero mass throws
/// ComponentError(empty_component).
Eigen::VectorXd m_step_variances(const Dataset& data,
                                 const Responsibilities& resp,
                                 const Eigen::MatrixXd& betas);

/// Pooled variance (1/n) sum_i sum_g z_ig (y_i - x_i'beta_g)^2.
double homoscedastic_variance(const Dataset& data, const Responsibilities& resp,
                              const Eigen::MatrixXd& betas);

Eigen::VectorXd clamp_variances(const Eigen::Ref<const Eigen::VectorXd>& raw,
                                const ConstraintSpec& spec);

/// Random near-equal hard partition, per-group OLS, uniform weights. Variances
/// start at the pooled residual variance (hetn/homn) or at the target (conc).
/// Deterministic in `seed`.
ModelParams initialize(const Dataset& data, int n_components,
                       const ConstraintSpec& spec, std::uint64_t seed);

FitResult run_em(const Dataset& data, int n_components,
                 const ConstraintSpec& spec, const EmConfig& config,
                 const ModelParams& init);

/// Best of `n_starts` seeded runs. Non-degenerate fits win over degenerate
/// ones; within a class the highest log-likelihood wins, ties to the lower
/// start index.
FitResult multi_start_fit(const Dataset& data, int n_components,
                          const ConstraintSpec& spec, const EmConfig& config,
                          int n_starts, std::uint64_t seed);

/// Seed used by multi_start_fit for start `index`.
std::uint64_t start_seed(std::uint64_t seed, int index);

}  // namespace clustreg
