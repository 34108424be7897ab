#pragma once

#include "clustreg/em.hpp"
#include "clustreg/parallel.hpp"
#include "clustreg/tuning.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clustreg {

/// Generative recipe for one synthetic clusterwise-regression scenario.
struct ScenarioSpec {
  std::string name;
  Index n = 100;
  std::vector<double> mixing{0.5, 0.5};
  int n_regressors = 3;
  std::vector<double> intercepts{4.0, 9.0};
  double coef_low = -1.5;
  double coef_high = 1.5;
  /// Inverse-Gamma(shape, scale): 1 / Gamma(shape, rate = scale),
  /// mean scale / (shape - 1).
  double variance_shape = 3.0;
  double variance_scale = 1.0;
  /// Multiplies every drawn variance; tiny values approach the noiseless limit.
  double variance_multiplier = 1.0;
  std::uint64_t seed = 1;

  int n_components() const noexcept { return static_cast<int>(mixing.size()); }
  void validate() const;
};

struct SimulatedSample {
  Dataset data;
  ModelParams truth;
  std::vector<int> labels;
};

SimulatedSample draw_scenario(const ScenarioSpec& spec, Rng& rng);

/// Inverse-Gamma draw with the convention above.
double draw_inverse_gamma(double shape, double scale, Rng& rng);

struct StudyConfig {
  std::vector<ScenarioSpec> scenarios;
  int replications = 250;
  int n_starts = 10;
  std::vector<Variant> estimators{Variant::homn, Variant::hetn, Variant::conc};
  CvConfig cv;
  EmConfig em;

  void validate() const;
};

/// Outcome of one estimator on one replication.
struct ReplicationRecord {
  int scenario = 0;
  int replication = 0;
  Variant estimator = Variant::hetn;
  bool failed = false;
  std::string error;
  bool degenerate = false;
  double mse_beta = 0.0;
  double mse_sigma = 0.0;
  double mse_sd = 0.0;
  double adj_rand = 0.0;
  double time_s = 0.0;
  /// Selected c for conc, NaN otherwise.
  double c = 0.0;
};

/// One row per (scenario, estimator), averaged over successful replications.
struct StudyRow {
  std::string scenario;
  Variant estimator = Variant::hetn;
  double mse_beta = 0.0;
  double mse_sigma = 0.0;
  double mse_sd = 0.0;
  double adj_rand = 0.0;
  double time_s = 0.0;
  double mean_c = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  int n_degenerate = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ReplicationRecord> records;
};

/// Fits one replication with every configured estimator.
std::vector<ReplicationRecord> run_replication(const StudyConfig& config,
                                               int scenario, int replication);

StudyResult run_study(const StudyConfig& config);

}  // namespace clustreg
