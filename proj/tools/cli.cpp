#include "cli.hpp"

#include "clustreg/error.hpp"
#include "clustreg/io.hpp"
#include "clustreg/metrics.hpp"
#include "clustreg/tuning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace clustreg::cli {

namespace {

struct DataOptions {
  std::string input;
  std::string benchmark;
  std::string response;
  std::string regressors;
  bool no_intercept = false;
  std::string delimiter = ",";
  bool no_header = false;
};

struct EstimatorOptions {
  std::string variant = "hetn";
  int components = 0;
  std::optional<double> c;
  int starts = 10;
  std::uint64_t seed = 1;
  int max_iter = 500;
  double tol = 1e-8;
};

struct CvOptions {
  int repeats = 0;
  double test_fraction = 0.1;
  std::string c_grid;
};

struct OutputOptions {
  std::string output;
  std::string emit = "json";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty()) {
    out << body;
    return;
  }
  try {
    write_file_atomic(path, body);
  } catch (const Error& e) {
    throw OutputError(e.what());
  }
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << "error: kind=" << kind << " message=\"" << one_line(message) << "\"\n";
}

void report_warning(std::ostream& err, const std::string& message) {
  err << "warn: message=\"" << one_line(message) << "\"\n";
}

ColumnRef column_ref(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), ::isdigit)) {
    return static_cast<std::size_t>(std::stoul(text));
  }
  return text;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

LabeledDataset load_data(const DataOptions& o, std::ostream& err) {
  if (!o.benchmark.empty()) {
    LabeledDataset d = load_benchmark(parse_benchmark(o.benchmark), o.input);
    for (const auto& w : d.warnings) report_warning(err, w);
    return d;
  }
  if (o.delimiter.size() != 1 && o.delimiter != "\\t") {
    throw UsageError("--delimiter must be a single character");
  }
  CsvSchema schema;
  schema.delimiter = o.delimiter == "\\t" ? '\t' : o.delimiter.front();
  schema.has_header = !o.no_header;
  schema.add_intercept = !o.no_intercept;
  schema.response_column = o.response.empty() ? ColumnRef(std::size_t{0}) : column_ref(o.response);
  if (o.regressors.empty()) {
    // Every column other than the response.
    const CsvTable table = read_csv_table(o.input, schema.delimiter, schema.has_header);
    for (std::size_t k = 0; k < table.header.size(); ++k) {
      const bool is_response =
          std::holds_alternative<std::size_t>(schema.response_column)
              ? std::get<std::size_t>(schema.response_column) == k
              : std::get<std::string>(schema.response_column) == table.header[k];
      if (!is_response) schema.regressor_columns.push_back(k);
    }
  } else {
    for (const auto& r : split_commas(o.regressors)) schema.regressor_columns.push_back(column_ref(r));
  }
  return {load_csv(o.input, schema), std::nullopt, {}, {}};
}

EmConfig em_config(const EstimatorOptions& o) {
  EmConfig em;
  em.max_iterations = o.max_iter;
  em.tolerance = o.tol;
  return em;
}

CvConfig cv_config(const CvOptions& o, std::uint64_t seed) {
  CvConfig cv;
  cv.n_repeats = o.repeats;
  cv.test_fraction = o.test_fraction;
  if (!o.c_grid.empty()) cv.c_grid = parse_c_grid(o.c_grid);
  cv.seed = seed;
  return cv;
}

std::string params_csv(const FitResult& fit, const std::vector<std::string>& names) {
  std::ostringstream out;
  out.precision(17);
  out << "component,weight,variance";
  for (const auto& n : names) out << ",beta_" << n;
  out << "\n";
  const ModelParams& p = fit.params;
  for (Index g = 0; g < p.n_components(); ++g) {
    out << g << "," << p.weights(g) << "," << p.variances(g);
    for (Index k = 0; k < p.n_features(); ++k) out << "," << p.coefficients(g, k);
    out << "\n";
  }
  return out.str();
}

void emit_fit(const OutputOptions& o, const FitDocument& doc, const Dataset& data,
              std::ostream& out) {
  std::string body;
  if (o.emit == "json") {
    body = fit_to_json(doc);
  } else if (o.emit == "csv") {
    body = params_csv(doc.fit, data.feature_names());
  } else {
    body = plot_data_csv(data, doc.fit);
  }
  write_output(o.output, body, out);
}

void add_data_options(CLI::App* sub, DataOptions& o) {
  sub->add_option("--input", o.input, "Input CSV file")->required()->check(CLI::ExistingFile);
  sub->add_option("--benchmark", o.benchmark, "Benchmark loader: ceo | temperature | iris")
      ->check(CLI::IsMember({"ceo", "temperature", "iris"}, CLI::ignore_case));
  sub->add_option("--response", o.response, "Response column (name or 0-based index)");
  sub->add_option("--regressors", o.regressors, "Comma-separated regressor columns");
  sub->add_flag("--no-intercept", o.no_intercept, "Do not prepend an intercept column");
  sub->add_option("--delimiter", o.delimiter, "Field delimiter (use \\t for tab)");
  sub->add_flag("--no-header", o.no_header, "Input has no header row");
}

void add_estimator_options(CLI::App* sub, EstimatorOptions& o, bool with_variant) {
  if (with_variant) {
    sub->add_option("--variant", o.variant, "hetn | homn | conc")
        ->check(CLI::IsMember({"hetn", "homn", "conc"}, CLI::ignore_case));
    sub->add_option("--c", o.c, "Constraint constant in (0, 1] (conc only)")
        ->check(CLI::Range(0.0, 1.0));
  }
  sub->add_option("--components", o.components, "Number of mixture components G")
      ->required()
      ->check(CLI::PositiveNumber);
  sub->add_option("--starts", o.starts, "Random starts")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--max-iter", o.max_iter, "EM iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--tol", o.tol, "Relative log-likelihood tolerance")->check(CLI::PositiveNumber);
}

void add_cv_options(CLI::App* sub, CvOptions& o) {
  sub->add_option("--cv-repeats", o.repeats, "Cross-validation repeats K (0: ceil(n/5))")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--test-fraction", o.test_fraction, "Test set fraction")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--c-grid", o.c_grid, "c grid: comma list or log:lo:hi:points");
}

void add_output_options(CLI::App* sub, OutputOptions& o, std::vector<std::string> emits) {
  sub->add_option("--output", o.output, "Output path (stdout when omitted)");
  sub->add_option("--emit", o.emit, "Output format")->check(CLI::IsMember(emits));
}

int degenerate_status(const FitResult& fit) {
  return fit.degenerate ? ExitCode::degenerate : ExitCode::ok;
}

int do_fit(const DataOptions& d, const EstimatorOptions& e, const OutputOptions& o,
           std::ostream& out, std::ostream& err) {
  const Variant variant = parse_variant(e.variant);
  if (e.c && variant != Variant::conc) throw UsageError("--c is only valid with --variant conc");
  if (variant == Variant::conc && !e.c) {
    throw UsageError("--variant conc needs --c; use 'tune' to select c by cross-validation");
  }
  const LabeledDataset data = load_data(d, err);
  const EmConfig em = em_config(e);

  FitDocument doc;
  doc.variant = variant;
  doc.n_components = e.components;
  doc.feature_names = data.data.feature_names();
  ConstraintSpec spec = ConstraintSpec::heteroscedastic();
  if (variant == Variant::homn) {
    spec = ConstraintSpec::homoscedastic();
  } else if (variant == Variant::conc) {
    // Same seed derivation as tune, so a pinned c reproduces the tuned fit.
    const double target =
        homoscedastic_target(data.data, e.components, em, e.starts, derive_seed(e.seed, 1));
    spec = ConstraintSpec::constrained(*e.c, target);
    doc.c = *e.c;
    doc.target_variance = target;
  }
  const std::uint64_t seed = variant == Variant::conc ? derive_seed(e.seed, 2) : e.seed;
  doc.fit = multi_start_fit(data.data, e.components, spec, em, e.starts, seed);
  emit_fit(o, doc, data.data, out);
  if (doc.fit.degenerate) report_warning(err, "only degenerate fits were found");
  return degenerate_status(doc.fit);
}

int do_tune(const DataOptions& d, const EstimatorOptions& e, const CvOptions& c,
            const OutputOptions& o, std::ostream& out, std::ostream& err) {
  const LabeledDataset data = load_data(d, err);
  const EmConfig em = em_config(e);
  const CvConfig cv = cv_config(c, e.seed);
  auto [fit, report] = fit_conc(data.data, e.components, cv, em, e.starts);
  FitDocument doc;
  doc.variant = Variant::conc;
  doc.n_components = e.components;
  doc.c = report.selected_c;
  doc.target_variance = report.target_variance;
  doc.feature_names = data.data.feature_names();
  doc.fit = std::move(fit);
  doc.cv = std::move(report);
  emit_fit(o, doc, data.data, out);
  return degenerate_status(doc.fit);
}

int do_simulate(const std::string& scenario_path, std::optional<int> replications,
                std::optional<int> starts, const OutputOptions& o, std::ostream& out) {
  std::ifstream in(scenario_path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + scenario_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  StudyConfig config = parse_study_config(ss.str());
  if (replications) config.replications = *replications;
  if (starts) config.n_starts = *starts;
  const StudyResult result = run_study(config);
  const std::string body = o.emit == "json" ? study_to_json(result) : study_to_csv(result);
  write_output(o.output, body, out);
  return ExitCode::ok;
}

std::vector<int> read_labels(const std::string& path) {
  CsvTable table = read_csv_table(path, ',', true);
  std::size_t col = 0;
  bool header_is_data = true;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (table.header[k] == "label" || table.header[k] == "labels") col = k;
  }
  try {
    (void)std::stoi(table.header[col]);
  } catch (...) {
    header_is_data = false;
  }
  std::vector<int> labels;
  if (header_is_data) labels.push_back(std::stoi(table.header[col]));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    try {
      labels.push_back(std::stoi(table.rows[i][col]));
    } catch (...) {
      throw Error(ErrorKind::parse, path + ": line " + std::to_string(table.line_numbers[i]) +
                                        " has a non-integer label");
    }
  }
  return labels;
}

int do_evaluate(const std::string& fit_path, const std::string& labels_path,
                const std::string& truth_path, const DataOptions& d, const OutputOptions& o,
                std::ostream& out, std::ostream& err) {
  const FitDocument doc = read_fit(fit_path);
  nlohmann::json result;
  result["variant"] = to_string(doc.variant);
  result["G"] = doc.n_components;
  result["degenerate"] = doc.fit.degenerate;

  std::optional<std::vector<int>> truth_labels;
  if (!labels_path.empty()) {
    truth_labels = read_labels(labels_path);
  } else if (!d.input.empty() && !d.benchmark.empty()) {
    truth_labels = load_data(d, err).true_labels;
    if (!truth_labels) throw UsageError("benchmark '" + d.benchmark + "' carries no labels");
  }
  if (truth_labels) {
    result["adj_rand"] = adjusted_rand(*truth_labels, doc.fit.labels);
  }
  if (!truth_path.empty()) {
    const FitDocument truth = read_fit(truth_path);
    const MseReport mse = param_mse(truth.fit.params, doc.fit.params);
    result["mse_beta"] = mse.avg_mse_beta;
    result["mse_sigma"] = mse.avg_mse_sigma;
    result["mse_sd"] = mse.avg_mse_sd;
    result["matching_permutation"] = mse.matching_permutation;
  }
  if (doc.variant != Variant::conc) {
    const Index n = static_cast<Index>(doc.fit.labels.size());
    const int j = static_cast<int>(doc.fit.params.n_features());
    const BicValue full = bic(doc.fit, n, doc.variant, doc.n_components, j);
    const BicValue kernel = bic(doc.fit, n, doc.variant, doc.n_components, j, BicConvention::kernel);
    result["bic"] = full.value;
    result["bic_kernel"] = kernel.value;
    result["bic_reliable"] = full.reliable;
    if (!full.reliable) report_warning(err, "BIC of a degenerate or unconverged fit is unreliable");
  }
  const std::string body = result.dump(2) + "\n";
  write_output(o.output, body, out);
  return ExitCode::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clusterwise linear regression: HetN, HomN and cross-validated ConC estimators",
               "clustreg"};
  app.require_subcommand(1);
  app.set_config("--preset", "", "key = value preset file ([fit], [tune] ... sections)");

  DataOptions data_opts;
  EstimatorOptions est_opts;
  CvOptions cv_opts;
  OutputOptions out_opts;

  CLI::App* fit = app.add_subcommand("fit", "Multi-start EM fit of one estimator");
  add_data_options(fit, data_opts);
  add_estimator_options(fit, est_opts, true);
  add_output_options(fit, out_opts, {"json", "csv", "plot-data"});

  CLI::App* tune = app.add_subcommand("tune", "Select c by cross-validation and fit ConC");
  add_data_options(tune, data_opts);
  add_estimator_options(tune, est_opts, false);
  add_cv_options(tune, cv_opts);
  add_output_options(tune, out_opts, {"json", "csv", "plot-data"});

  std::string scenario_path;
  std::optional<int> sim_replications;
  std::optional<int> sim_starts;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study from a scenario file");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--replications", sim_replications, "Override replications")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--starts", sim_starts, "Override random starts")->check(CLI::PositiveNumber);
  add_output_options(simulate, out_opts, {"csv", "json"});

  std::string eval_fit;
  std::string eval_labels;
  std::string eval_truth;
  DataOptions eval_data;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a fit against labels or true parameters");
  evaluate->add_option("--fit", eval_fit, "Fit JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--labels", eval_labels, "CSV of true labels")->check(CLI::ExistingFile);
  evaluate->add_option("--truth", eval_truth, "Fit-format JSON of true parameters")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--input", eval_data.input, "Benchmark file with labels")->check(CLI::ExistingFile);
  evaluate->add_option("--benchmark", eval_data.benchmark, "Benchmark name for --input")
      ->check(CLI::IsMember({"ceo", "temperature", "iris"}, CLI::ignore_case));
  add_output_options(evaluate, out_opts, {"json"});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return ExitCode::usage;
  }

  try {
    if (fit->parsed()) return do_fit(data_opts, est_opts, out_opts, out, err);
    if (tune->parsed()) return do_tune(data_opts, est_opts, cv_opts, out_opts, out, err);
    if (simulate->parsed()) return do_simulate(scenario_path, sim_replications, sim_starts, out_opts, out);
    if (evaluate->parsed()) {
      if (eval_labels.empty() && eval_truth.empty() && eval_data.input.empty()) {
        throw UsageError("evaluate needs --labels, --truth, or --input with --benchmark");
      }
      return do_evaluate(eval_fit, eval_labels, eval_truth, eval_data, out_opts, out, err);
    }
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what());
    return ExitCode::usage;
  } catch (const OutputError& e) {
    report_error(err, "io", e.what());
    return ExitCode::output_io;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    switch (e.kind()) {
      case ErrorKind::singular_component:
      case ErrorKind::empty_component:
      case ErrorKind::numerical:
        return ExitCode::numerical;
      default:
        return ExitCode::usage;
    }
  }
  return ExitCode::usage;
}

}  // namespace clustreg::cli
