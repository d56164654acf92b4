#ifndef DOUBLETHINK_TESTS_SUPPORT_HPP
#define DOUBLETHINK_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doublethink/linmodel.hpp"

namespace testing {

using doublethink::linmodel::Dataset;

inline std::vector<std::string> default_names(int nu) {
  std::vector<std::string> out;
  for (int j = 0; j < nu; ++j) out.push_back("x" + std::to_string(j + 1));
  return out;
}

/// Gaussian design with exchangeable correlation `rho`; y = X beta + noise.
inline Dataset random_dataset(std::mt19937_64& rng, int n, int nu, double rho = 0.0,
                              const std::vector<double>& beta = {}, double noise = 1.0) {
  std::normal_distribution<double> z;
  Dataset d;
  d.X.resize(n, nu);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double common = z(rng);
    for (int j = 0; j < nu; ++j) d.X(i, j) = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * z(rng);
    double mean = 0.0;
    for (int j = 0; j < nu && j < static_cast<int>(beta.size()); ++j) mean += beta[j] * d.X(i, j);
    d.y(i) = mean + noise * z(rng);
  }
  d.names = default_names(nu);
  return d;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace testing

#endif  // DOUBLETHINK_TESTS_SUPPORT_HPP
