#pragma once

#include "clustreg/em.hpp"
#include "clustreg/simulation.hpp"
#include "clustreg/tuning.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace clustreg {

/// Column reference by header name or 0-based position.
using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvSchema {
  ColumnRef response_column = std::size_t{0};
  std::vector<ColumnRef> regressor_columns;
  bool add_intercept = true;
  char delimiter = ',';
  bool has_header = true;
};

/// Raw parsed table: header (possibly synthesized) plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line number of every data row.
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv_table(const std::filesystem::path& path, char delimiter,
                        bool has_header);

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

enum class Benchmark { ceo, temperature, iris };

Benchmark parse_benchmark(const std::string& name);
const char* to_string(Benchmark b) noexcept;
/// Sample size documented for each benchmark.
Index documented_size(Benchmark b) noexcept;

struct LabeledDataset {
  Dataset data;
  std::optional<std::vector<int>> true_labels;
  std::vector<std::string> label_names;
  std::vector<std::string> warnings;
};

LabeledDataset load_benchmark(Benchmark which, const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

struct FitDocument {
  Variant variant = Variant::hetn;
  int n_components = 0;
  std::optional<double> c;
  std::optional<double> target_variance;
  FitResult fit;
  std::optional<CvReport> cv;
  std::vector<std::string> feature_names;
};

std::string fit_to_json(const FitDocument& doc);
FitDocument fit_from_json(const std::string& text);

void write_fit(const FitDocument& doc, const std::filesystem::path& path);
FitDocument read_fit(const std::filesystem::path& path);

/// Dataset as CSV with columns y, then the design columns; doubles are
/// printed with round-trip precision.
std::string dataset_to_csv(const Dataset& data);

/// Per-observation rows: observation, y, regressors, label, and the assigned
/// component's weight, variance and coefficients.
std::string plot_data_csv(const Dataset& data, const FitResult& fit);

std::string study_to_csv(const StudyResult& result);
std::string study_to_json(const StudyResult& result);

/// Plain-text key = value file; '#' starts a comment, [name] starts a section.
struct KeyValueSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
};
std::vector<KeyValueSection> parse_key_value(const std::string& text);

/// Scenario file: a global section (replications, starts, estimators, seed,
/// cv_repeats, test_fraction, c_grid, max_iter, tol) followed by one
/// [scenario] section per scenario.
/// "log:lo:hi:points" or a comma-separated list of values.
std::vector<double> parse_c_grid(const std::string& value);

StudyConfig parse_study_config(const std::string& text);

}  // namespace clustreg
