#include "clustreg/model.hpp"

#include "clustreg/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace clustreg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::singular_component: return "singular_component";
    case ErrorKind::empty_component: return "empty_component";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;  // log(2 pi)

void require_same_shape(const Dataset& data, const ModelParams& params) {
  if (params.n_features() != data.n_features()) {
    throw Error(ErrorKind::dimension_mismatch,
                "model has " + std::to_string(params.n_features()) +
                    " coefficients per component, data has " +
                    std::to_string(data.n_features()) + " design columns");
  }
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd responses, Eigen::MatrixXd design,
                 std::vector<std::string> feature_names)
    : responses_(std::move(responses)),
      design_(std::move(design)),
      feature_names_(std::move(feature_names)) {
  if (responses_.size() < 1) {
    throw Error(ErrorKind::invalid_argument, "dataset needs at least one observation");
  }
  if (design_.rows() != responses_.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "design has " + std::to_string(design_.rows()) + " rows, responses " +
                    std::to_string(responses_.size()));
  }
  if (!responses_.allFinite() || !design_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "dataset contains non-finite values");
  }
  if (feature_names_.empty()) {
    for (Index j = 0; j < design_.cols(); ++j) {
      feature_names_.push_back("x" + std::to_string(j));
    }
  } else if (static_cast<Index>(feature_names_.size()) != design_.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "feature_names length does not match design columns");
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Eigen::VectorXd y(static_cast<Index>(rows.size()));
  Eigen::MatrixXd x(static_cast<Index>(rows.size()), design_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index i = rows[k];
    if (i < 0 || i >= size()) {
      throw Error(ErrorKind::invalid_argument, "subset row out of range");
    }
    y(static_cast<Index>(k)) = responses_(i);
    x.row(static_cast<Index>(k)) = design_.row(i);
  }
  return Dataset(std::move(y), std::move(x), feature_names_);
}

Dataset Dataset::scaled_responses(double factor) const {
  return Dataset(responses_ * factor, design_, feature_names_);
}

void ModelParams::validate() const {
  const Index g = weights.size();
  if (g < 1) {
    throw Error(ErrorKind::invalid_argument, "model needs at least one component");
  }
  if (coefficients.rows() != g || variances.size() != g) {
    throw Error(ErrorKind::dimension_mismatch,
                "weights, coefficients and variances disagree on G");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "mixing weights must be finite and >= 0");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_argument, "mixing weights must sum to 1");
  }
  if (!(variances.array() > 0.0).all() || !variances.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "component variances must be positive and finite");
  }
  if (!coefficients.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "coefficients must be finite");
  }
}

double log_component_density(double y, const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& beta,
                             double sigma2) {
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "variance must be positive");
  }
  if (x.size() != beta.size()) {
    throw Error(ErrorKind::dimension_mismatch, "x and beta lengths differ");
  }
  const double r = y - x.dot(beta);
  return -0.5 * (kLogTwoPi + std::log(sigma2)) - 0.5 * r * r / sigma2;
}

double component_density(double y, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& beta,
                         double sigma2) {
  return std::exp(log_component_density(y, x, beta, sigma2));
}

Eigen::MatrixXd log_joint_densities(const Dataset& data, const ModelParams& params) {
  require_same_shape(data, params);
  const Index g_count = params.n_components();
  // n x G residuals in one product.
  Eigen::MatrixXd resid = (-data.design() * params.coefficients.transpose()).colwise() +
                          data.responses();
  Eigen::MatrixXd out(data.size(), g_count);
  for (Index g = 0; g < g_count; ++g) {
    const double s2 = params.variances(g);
    const double c0 = std::log(params.weights(g)) - 0.5 * (kLogTwoPi + std::log(s2));
    out.col(g) = (c0 - 0.5 * resid.col(g).array().square() / s2).matrix();
  }
  return out;
}

Eigen::VectorXd row_log_sum_exp(const Eigen::MatrixXd& log_terms) {
  Eigen::VectorXd out(log_terms.rows());
  for (Index i = 0; i < log_terms.rows(); ++i) {
    const double m = log_terms.row(i).maxCoeff();
    if (!std::isfinite(m)) {
      out(i) = m;  // -inf when every term is -inf
      continue;
    }
    out(i) = m + std::log((log_terms.row(i).array() - m).exp().sum());
  }
  return out;
}

LogLikelihood evaluate_log_likelihood(const Dataset& data, const ModelParams& params) {
  const Eigen::VectorXd row = row_log_sum_exp(log_joint_densities(data, params));
  LogLikelihood ll;
  for (Index i = 0; i < row.size(); ++i) {
    if (row(i) == -std::numeric_limits<double>::infinity()) ++ll.underflow_rows;
  }
  ll.value = ll.underflow_rows > 0 ? -std::numeric_limits<double>::infinity() : row.sum();
  return ll;
}

double log_likelihood(const Dataset& data, const ModelParams& params) {
  return evaluate_log_likelihood(data, params).value;
}

Responsibilities responsibilities_from_log_joint(const Eigen::MatrixXd& log_joint) {
  Responsibilities resp;
  resp.matrix.resize(log_joint.rows(), log_joint.cols());
  const double uniform = 1.0 / static_cast<double>(log_joint.cols());
  for (Index i = 0; i < log_joint.rows(); ++i) {
    const double m = log_joint.row(i).maxCoeff();
    if (!std::isfinite(m)) {
      resp.matrix.row(i).setConstant(uniform);
      resp.underflow_rows.push_back(i);
      continue;
    }
    Eigen::RowVectorXd e = (log_joint.row(i).array() - m).exp().matrix();
    resp.matrix.row(i) = e / e.sum();
  }
  return resp;
}

Responsibilities posterior_probs(const Dataset& data, const ModelParams& params) {
  return responsibilities_from_log_joint(log_joint_densities(data, params));
}

std::vector<int> classify(const Responsibilities& resp) {
  std::vector<int> labels(static_cast<std::size_t>(resp.rows()));
  for (Index i = 0; i < resp.rows(); ++i) {
    Index best = 0;
    for (Index g = 1; g < resp.cols(); ++g) {
      if (resp.matrix(i, g) > resp.matrix(i, best)) best = g;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

double min_variance_ratio(const Eigen::Ref<const Eigen::VectorXd>& variances) {
  if (variances.size() <= 1) return 1.0;
  return variances.minCoeff() / variances.maxCoeff();
}

double min_variance_ratio(const ModelParams& params) {
  return min_variance_ratio(params.variances);
}

}  // namespace clustreg
