#pragma once

// Hand-rolled generators and extended-precision oracles shared by the unit
// and acceptance suites. Nothing here calls into the library's numerics.

#include "clustreg/model.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace clustreg::testing {

using Wide = boost::multiprecision::cpp_bin_float_50;

struct Generated {
  Dataset data;
  ModelParams truth;
  std::vector<int> labels;
};

inline ModelParams random_params(std::mt19937_64& rng, int groups, int features,
                                 double spread = 4.0) {
  std::uniform_real_distribution<double> coef(-spread, spread);
  std::uniform_real_distribution<double> var(0.1, 2.0);
  std::gamma_distribution<double> mix(4.0, 1.0);
  ModelParams p;
  p.weights.resize(groups);
  p.coefficients.resize(groups, features);
  p.variances.resize(groups);
  for (int g = 0; g < groups; ++g) {
    p.weights(g) = mix(rng);
    p.variances(g) = var(rng);
    for (int j = 0; j < features; ++j) p.coefficients(g, j) = coef(rng);
  }
  p.weights /= p.weights.sum();
  return p;
}

/// Mixture sample with an intercept column followed by N(0,1) regressors.
inline Generated random_mixture(std::mt19937_64& rng, Index n, int groups,
                                int features) {
  Generated out{Dataset(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1)),
                random_params(rng, groups, features), {}};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<int> pick(out.truth.weights.data(),
                                       out.truth.weights.data() + groups);
  Eigen::MatrixXd x(n, features);
  Eigen::VectorXd y(n);
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < features; ++j) x(i, j) = normal(rng);
    const int g = pick(rng);
    out.labels[static_cast<std::size_t>(i)] = g;
    y(i) = x.row(i).dot(out.truth.coefficients.row(g)) +
           std::sqrt(out.truth.variances(g)) * normal(rng);
  }
  out.data = Dataset(std::move(y), std::move(x));
  return out;
}

/// Row-stochastic n x G matrix with entries bounded away from zero.
inline Eigen::MatrixXd random_stochastic(std::mt19937_64& rng, Index n, int groups) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd z(n, groups);
  for (Index i = 0; i < n; ++i) {
    for (int g = 0; g < groups; ++g) z(i, g) = u(rng);
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

/// Weighted normal equations X'WX b = X'Wy solved by Gaussian elimination
/// with partial pivoting in 50-digit binary floating point.
inline Eigen::VectorXd wls_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w) {
  const Index n = x.rows();
  const Index j = x.cols();
  std::vector<std::vector<Wide>> a(static_cast<std::size_t>(j),
                                   std::vector<Wide>(static_cast<std::size_t>(j + 1), Wide(0)));
  for (Index i = 0; i < n; ++i) {
    const Wide wi(w(i));
    for (Index r = 0; r < j; ++r) {
      const Wide xr = wi * Wide(x(i, r));
      for (Index c = 0; c < j; ++c) a[r][c] += xr * Wide(x(i, c));
      a[r][j] += xr * Wide(y(i));
    }
  }
  for (Index col = 0; col < j; ++col) {
    Index piv = col;
    for (Index r = col + 1; r < j; ++r) {
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (Index r = col + 1; r < j; ++r) {
      const Wide f = a[r][col] / a[col][col];
      for (Index c = col; c <= j; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<Wide> b(static_cast<std::size_t>(j));
  for (Index r = j - 1; r >= 0; --r) {
    Wide s = a[r][j];
    for (Index c = r + 1; c < j; ++c) s -= a[r][c] * b[c];
    b[r] = s / a[r][r];
  }
  Eigen::VectorXd out(j);
  for (Index r = 0; r < j; ++r) out(r) = static_cast<double>(b[r]);
  return out;
}

inline Wide wide_log_density(double y, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& beta, double sigma2) {
  Wide fit(0);
  for (Index j = 0; j < x.size(); ++j) fit += Wide(x(j)) * Wide(beta(j));
  const Wide r = Wide(y) - fit;
  const Wide s2(sigma2);
  return -r * r / (2 * s2) - log(2 * boost::math::constants::pi<Wide>() * s2) / 2;
}

/// Mixture log-likelihood summed directly in extended precision.
inline double loglik_oracle(const Dataset& data, const ModelParams& p) {
  Wide total(0);
  for (Index i = 0; i < data.size(); ++i) {
    Wide mix(0);
    for (Index g = 0; g < p.n_components(); ++g) {
      mix += Wide(p.weights(g)) *
             exp(wide_log_density(data.responses()(i), data.design().row(i).transpose(),
                                  p.coefficients.row(g).transpose(), p.variances(g)));
    }
    total += log(mix);
  }
  return static_cast<double>(total);
}

/// Rand-type pair counts by enumerating all pairs.
inline double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  long double both = 0, only_a = 0, only_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const bool sa = a[i] == a[k];
      const bool sb = b[i] == b[k];
      pairs += 1;
      if (sa && sb) both += 1;
      if (sa) only_a += 1;
      if (sb) only_b += 1;
    }
  }
  if (pairs == 0) return 1.0;
  const long double expected = only_a * only_b / pairs;
  const long double max_index = (only_a + only_b) / 2;
  if (max_index == expected) return 1.0;
  return static_cast<double>((both - expected) / (max_index - expected));
}

inline std::filesystem::path data_file(const std::string& name) {
  return std::filesystem::path(CLUSTREG_DATA_DIR) / name;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("clustreg-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace clustreg::testing
