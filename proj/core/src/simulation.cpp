#include "clustreg/simulation.hpp"

#include "clustreg/error.hpp"
#include "clustreg/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace clustreg {

void ScenarioSpec::validate() const {
  if (mixing.empty()) {
    throw Error(ErrorKind::invalid_argument, "scenario needs at least one component");
  }
  double total = 0.0;
  for (double p : mixing) {
    if (!(p > 0.0)) throw Error(ErrorKind::invalid_argument, "mixing proportions must be > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "mixing proportions must sum to 1");
  }
  if (intercepts.size() != mixing.size()) {
    throw Error(ErrorKind::dimension_mismatch, "one intercept per component required");
  }
  if (n_regressors < 0) throw Error(ErrorKind::invalid_argument, "n_regressors must be >= 0");
  if (n < static_cast<Index>(mixing.size()) * (n_regressors + 2)) {
    throw Error(ErrorKind::invalid_argument, "n too small for the scenario");
  }
  if (!(coef_low <= coef_high)) {
    throw Error(ErrorKind::invalid_argument, "coef_low must not exceed coef_high");
  }
  if (!(variance_shape > 1.0) || !(variance_scale > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "inverse-gamma needs shape > 1 and scale > 0");
  }
  if (!(variance_multiplier > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "variance_multiplier must be > 0");
  }
}

double draw_inverse_gamma(double shape, double scale, Rng& rng) {
  // Gamma with rate `scale` has scale parameter 1 / scale.
  std::gamma_distribution<double> gamma(shape, 1.0 / scale);
  return 1.0 / gamma(rng);
}

SimulatedSample draw_scenario(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  const Index n = spec.n;
  const int g_count = spec.n_components();
  const Index j = spec.n_regressors + 1;

  std::discrete_distribution<int> membership(spec.mixing.begin(), spec.mixing.end());
  std::vector<int> labels(static_cast<std::size_t>(n));
  bool all_present = false;
  for (int attempt = 0; attempt < 20 && !all_present; ++attempt) {
    std::vector<Index> counts(static_cast<std::size_t>(g_count), 0);
    for (auto& l : labels) {
      l = membership(rng);
      ++counts[static_cast<std::size_t>(l)];
    }
    all_present = std::all_of(counts.begin(), counts.end(), [](Index c) { return c > 0; });
  }
  if (!all_present) {
    throw Error(ErrorKind::numerical, "a component drew no members in 20 attempts");
  }

  std::normal_distribution<double> standard(0.0, 1.0);
  Eigen::MatrixXd design(n, j);
  for (Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (Index k = 1; k < j; ++k) design(i, k) = standard(rng);
  }

  ModelParams truth;
  truth.weights = Eigen::Map<const Eigen::VectorXd>(spec.mixing.data(), g_count);
  truth.weights /= truth.weights.sum();
  truth.coefficients.resize(g_count, j);
  truth.variances.resize(g_count);
  std::uniform_real_distribution<double> slope(spec.coef_low, spec.coef_high);
  for (int g = 0; g < g_count; ++g) {
    truth.coefficients(g, 0) = spec.intercepts[static_cast<std::size_t>(g)];
    for (Index k = 1; k < j; ++k) truth.coefficients(g, k) = slope(rng);
  }
  for (int g = 0; g < g_count; ++g) {
    truth.variances(g) =
        spec.variance_multiplier * draw_inverse_gamma(spec.variance_shape, spec.variance_scale, rng);
  }

  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const int g = labels[static_cast<std::size_t>(i)];
    y(i) = design.row(i).dot(truth.coefficients.row(g)) +
           std::sqrt(truth.variances(g)) * standard(rng);
  }

  std::vector<std::string> names{"intercept"};
  for (Index k = 1; k < j; ++k) names.push_back("x" + std::to_string(k));
  return {Dataset(std::move(y), std::move(design), std::move(names)), std::move(truth),
          std::move(labels)};
}

void StudyConfig::validate() const {
  if (replications < 1) throw Error(ErrorKind::invalid_argument, "replications must be >= 1");
  if (n_starts < 1) throw Error(ErrorKind::invalid_argument, "n_starts must be >= 1");
  if (scenarios.empty()) throw Error(ErrorKind::invalid_argument, "study has no scenarios");
  if (estimators.empty()) throw Error(ErrorKind::invalid_argument, "study has no estimators");
  for (const auto& s : scenarios) s.validate();
  em.validate();
}

std::vector<ReplicationRecord> run_replication(const StudyConfig& config, int scenario,
                                               int replication) {
  const ScenarioSpec& spec = config.scenarios[static_cast<std::size_t>(scenario)];
  const std::uint64_t stream = derive_seed(spec.seed, static_cast<std::uint64_t>(scenario),
                                           static_cast<std::uint64_t>(replication));
  Rng rng(stream);
  const SimulatedSample sample = draw_scenario(spec, rng);
  const std::uint64_t fit_seed = derive_seed(stream, 7);
  const int g_count = spec.n_components();

  std::vector<ReplicationRecord> out;
  for (Variant v : config.estimators) {
    ReplicationRecord rec;
    rec.scenario = scenario;
    rec.replication = replication;
    rec.estimator = v;
    rec.c = std::numeric_limits<double>::quiet_NaN();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      FitResult fit;
      if (v == Variant::conc) {
        CvConfig cv = config.cv;
        cv.seed = fit_seed;
        auto [f, report] = fit_conc(sample.data, g_count, cv, config.em, config.n_starts);
        fit = std::move(f);
        rec.c = report.selected_c;
      } else {
        const ConstraintSpec cs = v == Variant::hetn ? ConstraintSpec::heteroscedastic()
                                                     : ConstraintSpec::homoscedastic();
        fit = multi_start_fit(sample.data, g_count, cs, config.em, config.n_starts, fit_seed);
      }
      const MseReport mse = param_mse(sample.truth, fit.params);
      rec.mse_beta = mse.avg_mse_beta;
      rec.mse_sigma = mse.avg_mse_sigma;
      rec.mse_sd = mse.avg_mse_sd;
      rec.adj_rand = adjusted_rand(sample.labels, fit.labels);
      rec.degenerate = fit.degenerate;
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    rec.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(rec));
  }
  return out;
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const std::size_t n_scen = config.scenarios.size();
  const std::size_t reps = static_cast<std::size_t>(config.replications);

  std::vector<std::vector<ReplicationRecord>> cells(n_scen * reps);
  parallel_for(cells.size(), [&](std::size_t k) {
    cells[k] = run_replication(config, static_cast<int>(k / reps), static_cast<int>(k % reps));
  });

  StudyResult result;
  for (auto& cell : cells) {
    for (auto& rec : cell) result.records.push_back(std::move(rec));
  }

  for (std::size_t s = 0; s < n_scen; ++s) {
    const ScenarioSpec& spec = config.scenarios[s];
    for (Variant v : config.estimators) {
      StudyRow row;
      row.scenario = spec.name.empty() ? "scenario" + std::to_string(s) : spec.name;
      row.estimator = v;
      double c_sum = 0.0;
      for (const auto& rec : result.records) {
        if (rec.scenario != static_cast<int>(s) || rec.estimator != v) continue;
        if (rec.failed) {
          ++row.n_failed;
          continue;
        }
        ++row.n_ok;
        if (rec.degenerate) ++row.n_degenerate;
        row.mse_beta += rec.mse_beta;
        row.mse_sigma += rec.mse_sigma;
        row.mse_sd += rec.mse_sd;
        row.adj_rand += rec.adj_rand;
        row.time_s += rec.time_s;
        c_sum += rec.c;
      }
      const double k = row.n_ok > 0 ? row.n_ok : std::numeric_limits<double>::quiet_NaN();
      row.mse_beta /= k;
      row.mse_sigma /= k;
      row.mse_sd /= k;
      row.adj_rand /= k;
      row.time_s /= k;
      row.mean_c = v == Variant::conc ? c_sum / k : std::numeric_limits<double>::quiet_NaN();
      result.rows.push_back(row);
    }
  }
  return result;
}

}  // namespace clustreg
