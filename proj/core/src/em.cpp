#include "clustreg/em.hpp"

#include "clustreg/error.hpp"
#include "clustreg/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace clustreg {

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::hetn: return "hetn";
    case Variant::homn: return "homn";
    case Variant::conc: return "conc";
  }
  return "unknown";
}

Variant parse_variant(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "hetn") return Variant::hetn;
  if (lower == "homn") return Variant::homn;
  if (lower == "conc") return Variant::conc;
  throw Error(ErrorKind::invalid_argument, "unknown estimator variant '" + text + "'");
}

ConstraintSpec ConstraintSpec::heteroscedastic() {
  ConstraintSpec s;
  s.variant_ = Variant::hetn;
  return s;
}

ConstraintSpec ConstraintSpec::homoscedastic() {
  ConstraintSpec s;
  s.variant_ = Variant::homn;
  return s;
}

ConstraintSpec ConstraintSpec::constrained(double c, double target_variance) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "constraint constant c must lie in (0, 1]");
  }
  if (!(target_variance > 0.0) || !std::isfinite(target_variance)) {
    throw Error(ErrorKind::invalid_argument, "target variance must be positive and finite");
  }
  ConstraintSpec s;
  s.variant_ = Variant::conc;
  s.c_ = c;
  s.target_ = target_variance;
  const double root = std::sqrt(c);
  s.lower_ = target_variance * root;
  s.upper_ = target_variance / root;
  return s;
}

bool ConstraintSpec::feasible(const Eigen::Ref<const Eigen::VectorXd>& variances,
                              double rel_slack) const {
  if (variant_ != Variant::conc) return true;
  const double lo = lower_ * (1.0 - rel_slack);
  const double hi = upper_ * (1.0 + rel_slack);
  return ((variances.array() >= lo) && (variances.array() <= hi)).all();
}

void EmConfig::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorKind::invalid_argument, "max_iterations must be >= 1");
  }
  if (!(tolerance > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "tolerance must be > 0");
  }
  if (variance_floor && !(*variance_floor > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "variance_floor must be > 0");
  }
}

double EmConfig::floor_for(const Dataset& data) const {
  if (variance_floor) return *variance_floor;
  const Eigen::VectorXd& y = data.responses();
  const double n = static_cast<double>(y.size());
  const double var = n > 1 ? (y.array() - y.mean()).square().sum() / (n - 1) : 0.0;
  // Constant responses: fall back to an absolute threshold.
  return var > 0.0 ? 1e-10 * var : 1e-300;
}

namespace {

constexpr double kMaxCondition = 1e12;

// Weighted least squares for one component through QR of sqrt(W) X.
Eigen::VectorXd weighted_ls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, int component) {
  const Index j = x.cols();
  const double mass = w.sum();
  if (!(mass >= static_cast<double>(j))) {
    throw ComponentError(ErrorKind::singular_component, component,
                         "component " + std::to_string(component) +
                             " has weighted size " + std::to_string(mass) + " < " +
                             std::to_string(j) + " coefficients; restart advised");
  }
  const Eigen::VectorXd root = w.array().sqrt().matrix();
  const Eigen::MatrixXd a = root.asDiagonal() * x;
  const Eigen::VectorXd b = root.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd r =
      qr.matrixR().topLeftCorner(j, j).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  const double smin = sv(j - 1);
  const double cond = smin > 0.0 ? (sv(0) / smin) * (sv(0) / smin)
                                 : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw ComponentError(ErrorKind::singular_component, component,
                         "component " + std::to_string(component) +
                             " weighted cross-product is ill-conditioned (cond " +
                             std::to_string(cond) + "); restart advised");
  }
  return qr.solve(b);
}

void require_rows(const Dataset& data, const Responsibilities& resp) {
  if (resp.rows() != data.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "responsibilities have " + std::to_string(resp.rows()) +
                    " rows, data has " + std::to_string(data.size()));
  }
}

Eigen::MatrixXd residuals(const Dataset& data, const Eigen::MatrixXd& betas) {
  if (betas.cols() != data.n_features()) {
    throw Error(ErrorKind::dimension_mismatch, "coefficient width does not match design");
  }
  return (-data.design() * betas.transpose()).colwise() + data.responses();
}

}  // namespace

Responsibilities e_step(const Dataset& data, const ModelParams& params) {
  return posterior_probs(data, params);
}

Eigen::VectorXd m_step_weights(const Responsibilities& resp) {
  Eigen::VectorXd w = resp.matrix.colwise().sum().transpose() /
                      static_cast<double>(resp.rows());
  // Remove the rounding drift so the simplex invariant holds to 1e-12.
  return w / w.sum();
}

Eigen::MatrixXd m_step_betas(const Dataset& data, const Responsibilities& resp) {
  require_rows(data, resp);
  Eigen::MatrixXd betas(resp.cols(), data.n_features());
  for (Index g = 0; g < resp.cols(); ++g) {
    betas.row(g) = weighted_ls(data.design(), data.responses(), resp.matrix.col(g),
                               static_cast<int>(g))
                       .transpose();
  }
  return betas;
}

Eigen::VectorXd m_step_variances(const Dataset& data, const Responsibilities& resp,
                                 const Eigen::MatrixXd& betas) {
  require_rows(data, resp);
  const Eigen::MatrixXd r = residuals(data, betas);
  Eigen::VectorXd out(resp.cols());
  for (Index g = 0; g < resp.cols(); ++g) {
    const double mass = resp.matrix.col(g).sum();
    if (!(mass > 0.0)) {
      throw ComponentError(ErrorKind::empty_component, static_cast<int>(g),
                           "component " + std::to_string(g) +
                               " has zero posterior mass; restart advised");
    }
    out(g) = resp.matrix.col(g).dot(r.col(g).array().square().matrix()) / mass;
  }
  return out;
}

double homoscedastic_variance(const Dataset& data, const Responsibilities& resp,
                              const Eigen::MatrixXd& betas) {
  require_rows(data, resp);
  for (Index g = 0; g < resp.cols(); ++g) {
    if (!(resp.matrix.col(g).sum() > 0.0)) {
      throw ComponentError(ErrorKind::empty_component, static_cast<int>(g),
                           "component " + std::to_string(g) +
                               " has zero posterior mass; restart advised");
    }
  }
  const Eigen::MatrixXd r = residuals(data, betas);
  return (resp.matrix.array() * r.array().square()).sum() /
         static_cast<double>(data.size());
}

Eigen::VectorXd clamp_variances(const Eigen::Ref<const Eigen::VectorXd>& raw,
                                const ConstraintSpec& spec) {
  if (spec.variant() != Variant::conc) {
    throw Error(ErrorKind::invalid_argument, "clamp_variances requires a conc constraint");
  }
  return raw.cwiseMax(spec.lower_bound()).cwiseMin(spec.upper_bound());
}

std::uint64_t start_seed(std::uint64_t seed, int index) {
  return derive_seed(seed, static_cast<std::uint64_t>(index));
}

ModelParams initialize(const Dataset& data, int n_components, const ConstraintSpec& spec,
                       std::uint64_t seed) {
  const Index n = data.size();
  const Index j = data.n_features();
  const Index g_count = n_components;
  if (g_count < 1) {
    throw Error(ErrorKind::invalid_argument, "need at least one component");
  }
  if (n < g_count * (j + 1)) {
    throw Error(ErrorKind::invalid_argument,
                "n = " + std::to_string(n) + " is too small for " + std::to_string(g_count) +
                    " components with " + std::to_string(j) + " coefficients");
  }

  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  constexpr int kAttempts = 20;
  std::string last_error;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd indicator = Eigen::MatrixXd::Zero(n, g_count);
    for (Index k = 0; k < n; ++k) indicator(order[static_cast<std::size_t>(k)], k % g_count) = 1.0;

    ModelParams p;
    p.weights = Eigen::VectorXd::Constant(g_count, 1.0 / static_cast<double>(g_count));
    p.coefficients.resize(g_count, j);
    try {
      for (Index g = 0; g < g_count; ++g) {
        p.coefficients.row(g) = weighted_ls(data.design(), data.responses(),
                                            indicator.col(g), static_cast<int>(g))
                                    .transpose();
      }
    } catch (const ComponentError& e) {
      last_error = e.what();
      continue;
    }
    const Eigen::MatrixXd r = residuals(data, p.coefficients);
    const double pooled =
        (indicator.array() * r.array().square()).sum() / static_cast<double>(n);
    if (!(pooled > 0.0) || !std::isfinite(pooled)) {
      last_error = "pooled residual variance is zero";
      continue;
    }
    const double start_var =
        spec.variant() == Variant::conc ? spec.target_variance() : pooled;
    p.variances = Eigen::VectorXd::Constant(g_count, start_var);
    return p;
  }
  throw Error(ErrorKind::singular_component,
              "initialization failed after 20 partitions: " + last_error);
}

FitResult run_em(const Dataset& data, int n_components, const ConstraintSpec& spec,
                 const EmConfig& config, const ModelParams& init) {
  config.validate();
  init.validate();
  if (init.n_components() != n_components) {
    throw Error(ErrorKind::dimension_mismatch, "initial parameters have the wrong G");
  }
  if (init.n_features() != data.n_features()) {
    throw Error(ErrorKind::dimension_mismatch, "initial coefficients have the wrong J");
  }
  // A single component has no scale ratio to bound; conc reduces to hetn.
  const bool clamped = spec.variant() == Variant::conc && n_components > 1;
  if (clamped && !spec.feasible(init.variances)) {
    throw Error(ErrorKind::invalid_argument,
                "initial variances violate the conc bounds");
  }

  const double floor = config.floor_for(data);
  FitResult fit;
  fit.params = init;

  Eigen::MatrixXd log_joint = log_joint_densities(data, fit.params);
  auto loglik_of = [&](const Eigen::MatrixXd& lj) {
    const Eigen::VectorXd rows = row_log_sum_exp(lj);
    const double v = rows.sum();
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::numerical, "log-likelihood is not finite");
    }
    return v;
  };
  double current = loglik_of(log_joint);
  fit.loglik_trace.push_back(current);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const Responsibilities resp = responsibilities_from_log_joint(log_joint);

    ModelParams next;
    next.weights = m_step_weights(resp);
    next.coefficients = m_step_betas(data, resp);
    switch (spec.variant()) {
      case Variant::hetn:
        next.variances = m_step_variances(data, resp, next.coefficients);
        break;
      case Variant::homn:
        next.variances = Eigen::VectorXd::Constant(
            n_components, homoscedastic_variance(data, resp, next.coefficients));
        break;
      case Variant::conc:
        next.variances = m_step_variances(data, resp, next.coefficients);
        if (clamped) next.variances = clamp_variances(next.variances, spec);
        break;
    }

    bool collapsed = false;
    if (spec.variant() == Variant::hetn && next.variances.minCoeff() < floor) {
      collapsed = true;
      next.variances = next.variances.cwiseMax(std::numeric_limits<double>::min());
    }
    if (!(next.variances.array() > 0.0).all() || !next.variances.allFinite()) {
      throw Error(ErrorKind::numerical, "variance update produced a non-positive value");
    }

    fit.params = std::move(next);
    fit.iterations = iter + 1;
    log_joint = log_joint_densities(data, fit.params);

    if (collapsed) {
      fit.degenerate = true;
      const Eigen::VectorXd rows = row_log_sum_exp(log_joint);
      fit.loglik_trace.push_back(rows.sum());
      break;
    }

    const double updated = loglik_of(log_joint);
    fit.loglik_trace.push_back(updated);
    const bool done = std::abs(updated - current) < config.tolerance * std::abs(current);
    current = updated;
    if (done) {
      fit.converged = true;
      break;
    }
  }

  fit.loglik = fit.loglik_trace.back();
  fit.responsibilities = responsibilities_from_log_joint(log_joint);
  fit.labels = classify(fit.responsibilities);
  return fit;
}

FitResult multi_start_fit(const Dataset& data, int n_components, const ConstraintSpec& spec,
                          const EmConfig& config, int n_starts, std::uint64_t seed) {
  if (n_starts < 1) {
    throw Error(ErrorKind::invalid_argument, "n_starts must be >= 1");
  }
  config.validate();

  std::vector<std::optional<FitResult>> fits(static_cast<std::size_t>(n_starts));
  std::vector<StartSummary> summaries(static_cast<std::size_t>(n_starts));

  parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t s) {
    StartSummary& sum = summaries[s];
    sum.seed = start_seed(seed, static_cast<int>(s));
    try {
      const ModelParams init = initialize(data, n_components, spec, sum.seed);
      FitResult f = run_em(data, n_components, spec, config, init);
      sum.loglik = f.loglik;
      sum.degenerate = f.degenerate;
      sum.converged = f.converged;
      sum.iterations = f.iterations;
      sum.min_variance = f.params.variances.minCoeff();
      fits[s] = std::move(f);
    } catch (const Error& e) {
      sum.failed = true;
      sum.error = e.what();
    }
  });

  int best = -1;
  auto better = [&](int a, int b) {
    // true when start a beats start b
    const FitResult& fa = *fits[static_cast<std::size_t>(a)];
    const FitResult& fb = *fits[static_cast<std::size_t>(b)];
    if (fa.degenerate != fb.degenerate) return !fa.degenerate;
    return fa.loglik > fb.loglik;
  };
  for (int s = 0; s < n_starts; ++s) {
    if (!fits[static_cast<std::size_t>(s)]) continue;
    if (best < 0 || better(s, best)) best = s;
  }
  if (best < 0) {
    throw Error(ErrorKind::numerical,
                "all " + std::to_string(n_starts) + " starts failed; first error: " +
                    summaries.front().error);
  }

  FitResult result = std::move(*fits[static_cast<std::size_t>(best)]);
  result.starts = std::move(summaries);
  result.best_start = best;
  return result;
}

}  // namespace clustreg
