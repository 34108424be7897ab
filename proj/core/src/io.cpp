#include "clustreg/io.hpp"

#include "clustreg/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <unistd.h>

namespace clustreg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

// Lowercase alphanumerics only: "Petal.Width" and "petal_width" compare equal.
std::string normalize_name(const std::string& s) {
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalnum(ch)) out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

std::optional<double> parse_double(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

// Splits one record. delimiter == ' ' means runs of whitespace.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  if (delimiter == ' ') {
    std::istringstream in(line);
    std::string tok;
    while (in >> std::quoted(tok)) out.push_back(tok);
    return out;
  }
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                           const fs::path& path) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) {
    if (*idx >= header.size()) {
      throw Error(ErrorKind::parse, path.string() + ": column index " + std::to_string(*idx) +
                                        " out of range (" + std::to_string(header.size()) +
                                        " columns)");
    }
    return *idx;
  }
  const std::string& name = std::get<std::string>(ref);
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (normalize_name(header[k]) == normalize_name(name)) return k;
  }
  throw Error(ErrorKind::parse, path.string() + ": missing column '" + name + "'");
}

char detect_delimiter(const std::string& first_line) {
  const auto count = [&](char ch) { return std::count(first_line.begin(), first_line.end(), ch); };
  if (count(',') > 0) return ',';
  if (count('\t') > 0) return '\t';
  if (count(';') > 0) return ';';
  return ' ';
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

CsvTable read_csv_table(const fs::path& path, char delimiter, bool has_header) {
  const std::string text = read_text(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_done = !has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_record(line, delimiter);
    if (!header_done) {
      table.header = std::move(cells);
      header_done = true;
      continue;
    }
    if (table.header.empty()) {
      for (std::size_t k = 0; k < cells.size(); ++k) table.header.push_back("col" + std::to_string(k));
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::parse, path.string() + ": line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " fields, expected " +
                                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (table.rows.empty()) {
    throw Error(ErrorKind::parse, path.string() + ": no data rows");
  }
  return table;
}

namespace {

Dataset build_dataset(const CsvTable& table, std::size_t response,
                      const std::vector<std::size_t>& regressors, bool add_intercept,
                      const fs::path& path) {
  for (std::size_t r : regressors) {
    if (r == response) {
      throw Error(ErrorKind::invalid_argument,
                  "response column '" + table.header[response] + "' is also a regressor");
    }
  }
  const Index n = static_cast<Index>(table.rows.size());
  const Index offset = add_intercept ? 1 : 0;
  const Index j = offset + static_cast<Index>(regressors.size());
  if (j == 0) {
    throw Error(ErrorKind::invalid_argument, "design has no columns");
  }
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, j);
  auto cell = [&](Index i, std::size_t col) {
    const std::string& raw = table.rows[static_cast<std::size_t>(i)][col];
    const auto v = parse_double(raw);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorKind::parse,
                  path.string() + ": row " + std::to_string(i + 1) + " (line " +
                      std::to_string(table.line_numbers[static_cast<std::size_t>(i)]) +
                      "), column '" + table.header[col] + "': '" + raw +
                      "' is not a finite number");
    }
    return *v;
  };
  for (Index i = 0; i < n; ++i) {
    y(i) = cell(i, response);
    if (add_intercept) x(i, 0) = 1.0;
    for (std::size_t k = 0; k < regressors.size(); ++k) {
      x(i, offset + static_cast<Index>(k)) = cell(i, regressors[k]);
    }
  }
  std::vector<std::string> names;
  if (add_intercept) names.push_back("intercept");
  for (std::size_t r : regressors) names.push_back(table.header[r]);
  return Dataset(std::move(y), std::move(x), std::move(names));
}

}  // namespace

Dataset load_csv(const fs::path& path, const CsvSchema& schema) {
  const CsvTable table = read_csv_table(path, schema.delimiter, schema.has_header);
  const std::size_t response = resolve_column(schema.response_column, table.header, path);
  std::vector<std::size_t> regressors;
  for (const auto& ref : schema.regressor_columns) {
    regressors.push_back(resolve_column(ref, table.header, path));
  }
  return build_dataset(table, response, regressors, schema.add_intercept, path);
}

Benchmark parse_benchmark(const std::string& name) {
  const std::string n = lower(name);
  if (n == "ceo") return Benchmark::ceo;
  if (n == "temperature" || n == "temp") return Benchmark::temperature;
  if (n == "iris") return Benchmark::iris;
  throw Error(ErrorKind::invalid_argument, "unknown benchmark '" + name + "'");
}

const char* to_string(Benchmark b) noexcept {
  switch (b) {
    case Benchmark::ceo: return "ceo";
    case Benchmark::temperature: return "temperature";
    case Benchmark::iris: return "iris";
  }
  return "unknown";
}

Index documented_size(Benchmark b) noexcept {
  switch (b) {
    case Benchmark::ceo: return 59;
    case Benchmark::temperature: return 56;
    case Benchmark::iris: return 150;
  }
  return 0;
}

LabeledDataset load_benchmark(Benchmark which, const fs::path& path) {
  const std::string text = read_text(path);
  const std::string first_line = text.substr(0, text.find('\n'));
  const char delim = detect_delimiter(first_line);

  CsvTable table = read_csv_table(path, delim, true);
  // a real header has no numeric field
  const bool numeric_header = std::any_of(table.header.begin(), table.header.end(),
                                          [](const std::string& h) {
                                            return parse_double(h).has_value();
                                          });
  if (numeric_header) {
    table = read_csv_table(path, delim, false);
    if (which == Benchmark::iris && table.header.size() == 5) {
      table.header = {"sepal_length", "sepal_width", "petal_length", "petal_width", "species"};
    }
  }

  // First column whose normalized header contains any of the keys.
  auto find = [&](std::initializer_list<const char*> keys) -> std::size_t {
    for (const char* key : keys) {
      for (std::size_t k = 0; k < table.header.size(); ++k) {
        if (normalize_name(table.header[k]).find(key) != std::string::npos) return k;
      }
    }
    std::string wanted;
    for (const char* key : keys) wanted += std::string(wanted.empty() ? "" : "/") + key;
    throw Error(ErrorKind::parse,
                path.string() + ": no column matching '" + wanted + "' for benchmark " +
                    to_string(which));
  };

  LabeledDataset out{Dataset(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1)), {}, {}, {}};
  switch (which) {
    case Benchmark::ceo:
      out.data = build_dataset(table, find({"salary", "sal"}), {find({"age"})}, true, path);
      break;
    case Benchmark::temperature:
      out.data = build_dataset(table, find({"temp", "jan"}),
                               {find({"lat"}), find({"long", "lon"})}, true, path);
      break;
    case Benchmark::iris: {
      out.data = build_dataset(table, find({"petalwidth"}), {find({"sepalwidth"})}, true, path);
      const std::size_t species = find({"species", "class"});
      std::vector<int> labels;
      for (const auto& row : table.rows) {
        const std::string& name = row[species];
        auto it = std::find(out.label_names.begin(), out.label_names.end(), name);
        if (it == out.label_names.end()) {
          out.label_names.push_back(name);
          it = out.label_names.end() - 1;
        }
        labels.push_back(static_cast<int>(it - out.label_names.begin()));
      }
      out.true_labels = std::move(labels);
      break;
    }
  }
  if (out.data.size() != documented_size(which)) {
    out.warnings.push_back(std::string(to_string(which)) + " file has " +
                           std::to_string(out.data.size()) + " rows, documented size is " +
                           std::to_string(documented_size(which)));
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

std::string fit_to_json(const FitDocument& doc) {
  const FitResult& f = doc.fit;
  const ModelParams& p = f.params;
  json j;
  j["variant"] = to_string(doc.variant);
  j["G"] = doc.n_components;
  j["c"] = doc.c ? json(*doc.c) : json(nullptr);
  j["target_variance"] = doc.target_variance ? json(*doc.target_variance) : json(nullptr);
  j["feature_names"] = doc.feature_names;
  j["weights"] = std::vector<double>(p.weights.data(), p.weights.data() + p.weights.size());
  json coefs = json::array();
  for (Index g = 0; g < p.coefficients.rows(); ++g) {
    std::vector<double> row(static_cast<std::size_t>(p.coefficients.cols()));
    for (Index k = 0; k < p.coefficients.cols(); ++k) row[static_cast<std::size_t>(k)] = p.coefficients(g, k);
    coefs.push_back(row);
  }
  j["coefficients"] = coefs;
  j["variances"] = std::vector<double>(p.variances.data(), p.variances.data() + p.variances.size());
  j["loglik"] = number(f.loglik);
  j["labels"] = f.labels;
  json trace = json::array();
  for (double v : f.loglik_trace) trace.push_back(number(v));
  j["trace"] = trace;
  j["degenerate"] = f.degenerate;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  json resp = json::array();
  for (Index i = 0; i < f.responsibilities.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(f.responsibilities.cols()));
    for (Index g = 0; g < f.responsibilities.cols(); ++g) row[static_cast<std::size_t>(g)] = f.responsibilities.matrix(i, g);
    resp.push_back(row);
  }
  j["responsibilities"] = resp;
  json starts = json::array();
  for (const auto& s : f.starts) {
    starts.push_back({{"seed", s.seed},
                      {"failed", s.failed},
                      {"error", s.error},
                      {"loglik", number(s.loglik)},
                      {"degenerate", s.degenerate},
                      {"converged", s.converged},
                      {"iterations", s.iterations},
                      {"min_variance", number(s.min_variance)}});
  }
  j["starts"] = starts;
  j["best_start"] = f.best_start;
  if (doc.cv) {
    json table = json::array();
    for (const auto& row : doc.cv->rows) {
      table.push_back({{"c", row.c},
                       {"cv_loglik", number(row.cv_loglik)},
                       {"degenerate_fits", row.degenerate_fits},
                       {"failed_fits", row.failed_fits}});
    }
    j["cv_table"] = table;
    j["selected_c"] = doc.cv->selected_c;
    j["cv_target_variance"] = doc.cv->target_variance;
  } else {
    j["cv_table"] = nullptr;
  }
  return j.dump(2) + "\n";
}

FitDocument fit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("invalid fit JSON: ") + e.what());
  }
  try {
    FitDocument doc;
    doc.variant = parse_variant(j.at("variant").get<std::string>());
    doc.n_components = j.at("G").get<int>();
    if (!j.at("c").is_null()) doc.c = j.at("c").get<double>();
    if (j.contains("target_variance") && !j["target_variance"].is_null()) {
      doc.target_variance = j["target_variance"].get<double>();
    }
    if (j.contains("feature_names")) doc.feature_names = j["feature_names"].get<std::vector<std::string>>();

    FitResult& f = doc.fit;
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto v = j.at("variances").get<std::vector<double>>();
    const auto b = j.at("coefficients").get<std::vector<std::vector<double>>>();
    const Index g_count = static_cast<Index>(w.size());
    const Index width = b.empty() ? 0 : static_cast<Index>(b.front().size());
    f.params.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), g_count);
    f.params.variances = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    f.params.coefficients.resize(static_cast<Index>(b.size()), width);
    for (std::size_t g = 0; g < b.size(); ++g) {
      if (static_cast<Index>(b[g].size()) != width) {
        throw Error(ErrorKind::parse, "ragged coefficient rows in fit JSON");
      }
      for (Index k = 0; k < width; ++k) f.params.coefficients(static_cast<Index>(g), k) = b[g][static_cast<std::size_t>(k)];
    }
    f.loglik = number_from(j.at("loglik"));
    f.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& t : j.at("trace")) f.loglik_trace.push_back(number_from(t));
    f.degenerate = j.at("degenerate").get<bool>();
    f.converged = j.value("converged", false);
    f.iterations = j.value("iterations", 0);
    if (j.contains("responsibilities")) {
      const auto r = j["responsibilities"].get<std::vector<std::vector<double>>>();
      f.responsibilities.matrix.resize(static_cast<Index>(r.size()), g_count);
      for (std::size_t i = 0; i < r.size(); ++i) {
        for (Index g = 0; g < g_count; ++g) f.responsibilities.matrix(static_cast<Index>(i), g) = r[i].at(static_cast<std::size_t>(g));
      }
    }
    if (j.contains("starts")) {
      for (const auto& s : j["starts"]) {
        StartSummary ss;
        ss.seed = s.at("seed").get<std::uint64_t>();
        ss.failed = s.at("failed").get<bool>();
        ss.error = s.at("error").get<std::string>();
        ss.loglik = number_from(s.at("loglik"));
        ss.degenerate = s.at("degenerate").get<bool>();
        ss.converged = s.at("converged").get<bool>();
        ss.iterations = s.at("iterations").get<int>();
        ss.min_variance = number_from(s.at("min_variance"));
        f.starts.push_back(std::move(ss));
      }
    }
    f.best_start = j.value("best_start", 0);
    if (j.contains("cv_table") && !j["cv_table"].is_null()) {
      CvReport cv;
      for (const auto& row : j["cv_table"]) {
        cv.rows.push_back({row.at("c").get<double>(), number_from(row.at("cv_loglik")),
                           row.at("degenerate_fits").get<int>(), row.at("failed_fits").get<int>()});
      }
      cv.selected_c = j.at("selected_c").get<double>();
      cv.target_variance = j.value("cv_target_variance", 0.0);
      doc.cv = std::move(cv);
    }
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed fit JSON: ") + e.what());
  }
}

void write_fit(const FitDocument& doc, const fs::path& path) {
  write_file_atomic(path, fit_to_json(doc));
}

FitDocument read_fit(const fs::path& path) { return fit_from_json(read_text(path)); }

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "y";
  for (const auto& name : data.feature_names()) out += "," + name;
  out += "\n";
  for (Index i = 0; i < data.size(); ++i) {
    out += fmt_double(data.responses()(i));
    for (Index k = 0; k < data.n_features(); ++k) out += "," + fmt_double(data.design()(i, k));
    out += "\n";
  }
  return out;
}

std::string plot_data_csv(const Dataset& data, const FitResult& fit) {
  const auto& names = data.feature_names();
  std::string out = "observation,y";
  for (const auto& name : names) out += "," + name;
  out += ",label,weight,variance";
  for (const auto& name : names) out += ",beta_" + name;
  out += "\n";
  for (Index i = 0; i < data.size(); ++i) {
    const int g = fit.labels.at(static_cast<std::size_t>(i));
    out += std::to_string(i) + "," + fmt_double(data.responses()(i));
    for (Index k = 0; k < data.n_features(); ++k) out += "," + fmt_double(data.design()(i, k));
    out += "," + std::to_string(g) + "," + fmt_double(fit.params.weights(g)) + "," +
           fmt_double(fit.params.variances(g));
    for (Index k = 0; k < data.n_features(); ++k) out += "," + fmt_double(fit.params.coefficients(g, k));
    out += "\n";
  }
  return out;
}

std::string study_to_csv(const StudyResult& result) {
  std::string out = "scenario,estimator,mse_beta,mse_sigma,adj_rand,time_s,mean_c,n_ok,n_failed,n_degenerate,mse_sd\n";
  for (const auto& r : result.rows) {
    out += r.scenario + "," + to_string(r.estimator) + "," + fmt_double(r.mse_beta) + "," +
           fmt_double(r.mse_sigma) + "," + fmt_double(r.adj_rand) + "," + fmt_double(r.time_s) +
           "," + fmt_double(r.mean_c) + "," + std::to_string(r.n_ok) + "," +
           std::to_string(r.n_failed) + "," + std::to_string(r.n_degenerate) + "," +
           fmt_double(r.mse_sd) + "\n";
  }
  return out;
}

std::string study_to_json(const StudyResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"estimator", to_string(r.estimator)},
                    {"mse_beta", number(r.mse_beta)},
                    {"mse_sigma", number(r.mse_sigma)},
                    {"adj_rand", number(r.adj_rand)},
                    {"time_s", number(r.time_s)},
                    {"mean_c", number(r.mean_c)},
                    {"n_ok", r.n_ok},
                    {"n_failed", r.n_failed},
                    {"n_degenerate", r.n_degenerate},
                    {"mse_sd", number(r.mse_sd)}});
  }
  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({{"scenario", r.scenario},
                       {"replication", r.replication},
                       {"estimator", to_string(r.estimator)},
                       {"failed", r.failed},
                       {"error", r.error},
                       {"degenerate", r.degenerate},
                       {"mse_beta", number(r.mse_beta)},
                       {"mse_sigma", number(r.mse_sigma)},
                       {"mse_sd", number(r.mse_sd)},
                       {"adj_rand", number(r.adj_rand)},
                       {"time_s", number(r.time_s)},
                       {"c", number(r.c)}});
  }
  return json{{"rows", rows}, {"records", records}}.dump(2) + "\n";
}

std::vector<KeyValueSection> parse_key_value(const std::string& text) {
  std::vector<KeyValueSection> sections(1);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": unterminated section");
      }
      sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected key = value");
    }
    sections.back().entries.emplace_back(lower(trim(t.substr(0, eq))), trim(t.substr(eq + 1)));
  }
  return sections;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  const auto v = parse_double(value);
  if (!v) throw Error(ErrorKind::parse, "key '" + key + "': '" + value + "' is not a number");
  return *v;
}

long long to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v)) throw Error(ErrorKind::parse, "key '" + key + "' must be an integer");
  return static_cast<long long>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& cell : split_record(value, ',')) out.push_back(to_double(key, cell));
  return out;
}

}  // namespace

std::vector<double> parse_c_grid(const std::string& value) {
  // "log:lo:hi:points" or a comma-separated list.
  if (value.rfind("log:", 0) == 0) {
    const auto parts = split_record(value.substr(4), ':');
    if (parts.size() != 3) throw Error(ErrorKind::parse, "c_grid log spec needs lo:hi:points");
    return CvConfig::log_grid(to_double("c_grid", parts[0]), to_double("c_grid", parts[1]),
                              static_cast<int>(to_int("c_grid", parts[2])));
  }
  return to_list("c_grid", value);
}

StudyConfig parse_study_config(const std::string& text) {
  const auto sections = parse_key_value(text);
  StudyConfig config;
  std::optional<std::uint64_t> global_seed;
  for (const auto& [key, value] : sections.front().entries) {
    if (key == "replications") config.replications = static_cast<int>(to_int(key, value));
    else if (key == "starts") config.n_starts = static_cast<int>(to_int(key, value));
    else if (key == "estimators") {
      config.estimators.clear();
      for (const auto& e : split_record(value, ',')) config.estimators.push_back(parse_variant(e));
    } else if (key == "seed") global_seed = static_cast<std::uint64_t>(to_int(key, value));
    else if (key == "cv_repeats") config.cv.n_repeats = static_cast<int>(to_int(key, value));
    else if (key == "test_fraction") config.cv.test_fraction = to_double(key, value);
    else if (key == "c_grid") config.cv.c_grid = parse_c_grid(value);
    else if (key == "max_iter") config.em.max_iterations = static_cast<int>(to_int(key, value));
    else if (key == "tol") config.em.tolerance = to_double(key, value);
    else throw Error(ErrorKind::parse, "unknown study key '" + key + "'");
  }
  for (std::size_t s = 1; s < sections.size(); ++s) {
    if (lower(sections[s].name) != "scenario") {
      throw Error(ErrorKind::parse, "unknown section [" + sections[s].name + "]");
    }
    ScenarioSpec spec;
    spec.name = "scenario" + std::to_string(s - 1);
    if (global_seed) spec.seed = derive_seed(*global_seed, s - 1);
    for (const auto& [key, value] : sections[s].entries) {
      if (key == "name") spec.name = value;
      else if (key == "n") spec.n = static_cast<Index>(to_int(key, value));
      else if (key == "mixing") spec.mixing = to_list(key, value);
      else if (key == "intercepts") spec.intercepts = to_list(key, value);
      else if (key == "n_regressors") spec.n_regressors = static_cast<int>(to_int(key, value));
      else if (key == "coef_low") spec.coef_low = to_double(key, value);
      else if (key == "coef_high") spec.coef_high = to_double(key, value);
      else if (key == "variance_shape") spec.variance_shape = to_double(key, value);
      else if (key == "variance_scale") spec.variance_scale = to_double(key, value);
      else if (key == "variance_multiplier") spec.variance_multiplier = to_double(key, value);
      else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(key, value));
      else throw Error(ErrorKind::parse, "unknown scenario key '" + key + "'");
    }
    config.scenarios.push_back(std::move(spec));
  }
  config.validate();
  return config;
}

}  // namespace clustreg
