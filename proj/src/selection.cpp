#include "doublethink/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doublethink/distributions.hpp"
#include "doublethink/errors.hpp"

namespace doublethink::ctp {

std::vector<double> leave_one_out_tests(const linmodel::Dataset& data) {
  data.validate();
  const int nu = data.nu();
  const ModelId full = ModelId::full(nu);
  const auto grand = linmodel::fit_submodel(data, full);
  std::vector<double> out(nu);
  for (int j = 0; j < nu; ++j) {
    const auto drop = linmodel::fit_submodel(data, full.without(j));
    out[j] = chisq1_upper_tail(2.0 * (grand.log_mlr - drop.log_mlr));
  }
  return out;
}

std::vector<double> marginal_tests(const linmodel::Dataset& data) {
  data.validate();
  std::vector<double> out(data.nu());
  for (int j = 0; j < data.nu(); ++j)
    out[j] = chisq1_upper_tail(2.0 * linmodel::fit_submodel(data, ModelId().with(j)).log_mlr);
  return out;
}

std::vector<int> select_subset(const linmodel::Dataset& data, int max_vars, double rho_cap) {
  const int nu = data.nu();
  if (max_vars < 0 || max_vars > nu) throw Error(ErrorCode::InvalidArgument, "max_vars must lie in [0, nu]");
  if (!(rho_cap >= 0.0 && rho_cap <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho_cap must lie in [0, 1]");
  const auto p = marginal_tests(data);
  const auto corr = linmodel::correlation_matrix(data);

  std::vector<int> order(nu);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });

  std::vector<int> admitted;
  for (int j : order) {
    if (static_cast<int>(admitted.size()) >= max_vars) break;
    int high = 0;
    for (int k : admitted) high += std::abs(corr(j, k)) > rho_cap;
    if (high >= 2) continue;
    admitted.push_back(j);
  }
  return admitted;
}

linmodel::Dataset subset_columns(const linmodel::Dataset& data, const std::vector<int>& columns) {
  linmodel::Dataset out;
  out.y = data.y;
  out.nuisance = data.nuisance;
  out.X.resize(data.X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t m = 0; m < columns.size(); ++m) {
    const int j = columns[m];
    if (j < 0 || j >= data.nu()) throw Error(ErrorCode::UnknownVariables, "column index out of range");
    out.X.col(static_cast<Eigen::Index>(m)) = data.X.col(j);
    out.names.push_back(data.names[j]);
  }
  return out;
}

}  // namespace doublethink::ctp
