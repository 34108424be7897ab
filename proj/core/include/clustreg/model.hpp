#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace clustreg {

using Index = Eigen::Index;

/// n observations of a scalar response and a J-column design matrix.
/// When an intercept is modeled the first design column is all ones.
class Dataset {
 public:
  Dataset(Eigen::VectorXd responses, Eigen::MatrixXd design,
          std::vector<std::string> feature_names = {});

  Index size() const noexcept { return responses_.size(); }
  Index n_features() const noexcept { return design_.cols(); }

  const Eigen::VectorXd& responses() const noexcept { return responses_; }
  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }

  /// Rows selected by `rows`, in the given order.
  Dataset subset(const std::vector<Index>& rows) const;

  /// Same design, responses multiplied by `factor`.
  Dataset scaled_responses(double factor) const;

 private:
  Eigen::VectorXd responses_;
  Eigen::MatrixXd design_;
  std::vector<std::string> feature_names_;
};

/// Mixing proportions, per-component coefficient rows and variances.
/// coefficients is G x J; row g holds beta_g.
struct ModelParams {
  Eigen::VectorXd weights;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd variances;

  Index n_components() const noexcept { return weights.size(); }
  Index n_features() const noexcept { return coefficients.cols(); }

  /// Throws Error(invalid_argument) when the simplex/positivity/shape
  /// invariants do not hold.
  void validate() const;
};

/// Posterior membership probabilities, n x G, rows summing to one.
struct Responsibilities {
  Eigen::MatrixXd matrix;
  /// Observations for which every component density underflowed; those rows
  /// are set to 1/G.
  std::vector<Index> underflow_rows;

  Index rows() const noexcept { return matrix.rows(); }
  Index cols() const noexcept { return matrix.cols(); }
};

double component_density(double y, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& beta,
                         double sigma2);

double log_component_density(double y,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& beta,
                             double sigma2);

/// log p_g + log f_g(y_i | x_i) for every observation and component.
Eigen::MatrixXd log_joint_densities(const Dataset& data,
                                    const ModelParams& params);

struct LogLikelihood {
  double value = 0.0;
  /// Observations whose mixture density is exactly zero even after
  /// max-subtraction. When non-zero, value is -infinity.
  Index underflow_rows = 0;

  bool finite() const noexcept { return underflow_rows == 0; }
};

/// Row-wise log-sum-exp of a matrix of log terms.
Eigen::VectorXd row_log_sum_exp(const Eigen::MatrixXd& log_terms);

LogLikelihood evaluate_log_likelihood(const Dataset& data,
                                      const ModelParams& params);

/// Sample log-likelihood sum_i log sum_g p_g f_g(y_i | x_i).
double log_likelihood(const Dataset& data, const ModelParams& params);

/// Normalizes log joint densities row by row into responsibilities.
Responsibilities responsibilities_from_log_joint(const Eigen::MatrixXd& log_joint);

Responsibilities posterior_probs(const Dataset& data, const ModelParams& params);

/// Crisp assignment: argmax per row, ties to the smallest index. 0-based.
std::vector<int> classify(const Responsibilities& resp);

/// min_{i != j} sigma_i^2 / sigma_j^2, i.e. min variance over max variance.
double min_variance_ratio(const ModelParams& params);
double min_variance_ratio(const Eigen::Ref<const Eigen::VectorXd>& variances);

}  // namespace clustreg
