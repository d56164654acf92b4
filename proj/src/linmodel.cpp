#include "doublethink/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doublethink/errors.hpp"

namespace doublethink::linmodel {

namespace {

struct LeastSquares {
  VectorXd coef;
  double rss = 0.0;
};

LeastSquares least_squares(const MatrixXd& design, const VectorXd& y, ModelId model) {
  LeastSquares out;
  if (design.cols() == 0) {
    out.rss = y.squaredNorm();
    return out;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design.rows(), design.cols());
  qr.setThreshold(kRankTolerance);
  qr.compute(design);
  if (qr.rank() < design.cols()) {
    std::ostringstream msg;
    msg << "design for model " << model.bits() << " is rank deficient (rank " << qr.rank() << " of "
        << design.cols() << " columns)";
    throw Error(ErrorCode::RankDeficient, msg.str());
  }
  out.coef = qr.solve(y);
  out.rss = (y - design * out.coef).squaredNorm();
  return out;
}

MatrixXd assemble(const Dataset& data, ModelId s, const MatrixXd& nuisance) {
  const auto idx = s.indices();
  MatrixXd design(data.n(), static_cast<Eigen::Index>(idx.size()) + nuisance.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) design.col(static_cast<Eigen::Index>(k)) = data.X.col(idx[k]);
  if (nuisance.cols() > 0) design.rightCols(nuisance.cols()) = nuisance;
  return design;
}

}  // namespace

MatrixXd Dataset::nuisance_design() const {
  const Eigen::Index extra = nuisance.extra_columns.cols();
  MatrixXd N(n(), (nuisance.intercept ? 1 : 0) + extra);
  Eigen::Index c = 0;
  if (nuisance.intercept) N.col(c++).setOnes();
  if (extra > 0) N.rightCols(extra) = nuisance.extra_columns;
  return N;
}

void Dataset::validate() const {
  if (X.rows() != y.size()) throw Error(ErrorCode::InvalidArgument, "X and y have different numbers of rows");
  if (static_cast<int>(names.size()) != nu()) throw Error(ErrorCode::InvalidArgument, "one name per candidate column is required");
  if (nuisance.extra_columns.cols() > 0 && nuisance.extra_columns.rows() != y.size())
    throw Error(ErrorCode::InvalidArgument, "nuisance columns have the wrong number of rows");
  if (const auto* known = std::get_if<KnownVariance>(&nuisance.variance); known && !(known->sigma2 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "known variance must be positive");
  for (int j = 0; j < nu(); ++j) {
    if (X.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw Error(ErrorCode::InvalidArgument, "candidate column '" + names[j] + "' is all zero");
  }
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw Error(ErrorCode::InvalidArgument, "candidate names must be unique");
  const int mean_params = nu() + static_cast<int>(nuisance.intercept) + static_cast<int>(nuisance.extra_columns.cols());
  if (is_profiled(nuisance.variance) && n() < mean_params + 1)
    throw Error(ErrorCode::InvalidArgument, "profiled variance needs n >= nu + nuisance columns + 1");
}

MatrixXd FitResult::coefficient_covariance() const {
  const Eigen::Index k = beta_hat.size();
  if (k == 0) return MatrixXd(0, 0);
  const MatrixXd inv = obs_info.ldlt().solve(MatrixXd::Identity(obs_info.rows(), obs_info.cols()));
  return inv.topLeftCorner(k, k);
}

FitResult fit_submodel(const Dataset& data, ModelId s) {
  if (s.bits() >> data.nu()) throw Error(ErrorCode::InvalidArgument, "model references a variable beyond nu");
  const MatrixXd nuisance = data.nuisance_design();
  const LeastSquares null_fit = least_squares(nuisance, data.y, ModelId{});
  const MatrixXd design = assemble(data, s, nuisance);
  const LeastSquares fit = s.is_null() ? null_fit : least_squares(design, data.y, s);

  FitResult out;
  out.model = s;
  out.rss = fit.rss;
  out.rss_null = null_fit.rss;
  const Eigen::Index k = s.size();
  if (fit.coef.size() > 0) {
    out.beta_hat = fit.coef.head(k);
    out.nuisance_hat = fit.coef.tail(fit.coef.size() - k);
  } else {
    out.beta_hat.resize(0);
    out.nuisance_hat.resize(0);
  }

  if (const auto* known = std::get_if<KnownVariance>(&data.nuisance.variance)) {
    out.sigma2 = known->sigma2;
    out.log_mlr = s.is_null() ? 0.0 : (null_fit.rss - fit.rss) / (2.0 * known->sigma2);
  } else {
    // numerical zero relative to the nuisance-only fit
    if (!(null_fit.rss > 0.0) || !(fit.rss > 1e-12 * null_fit.rss))
      throw Error(ErrorCode::DegenerateVariance, "residual sum of squares is zero under profiled variance");
    out.sigma2 = fit.rss / data.n();
    out.log_mlr = s.is_null() ? 0.0 : 0.5 * data.n() * (std::log(null_fit.rss) - std::log(fit.rss));
  }
  out.obs_info = design.transpose() * design / out.sigma2;
  return out;
}

CorrelationMatrix correlation_matrix(const Eigen::Ref<const MatrixXd>& X) {
  const MatrixXd centered = X.rowwise() - X.colwise().mean();
  const VectorXd norms = centered.colwise().norm();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (!(norms(j) > 0.0))
      throw Error(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(j) + " has zero variance");
  }
  const MatrixXd unit = centered * norms.cwiseInverse().asDiagonal();
  CorrelationMatrix rho = unit.transpose() * unit;
  for (Eigen::Index j = 0; j < rho.rows(); ++j) {
    rho(j, j) = 1.0;
    for (Eigen::Index k = j + 1; k < rho.cols(); ++k) {
      const double v = std::clamp(0.5 * (rho(j, k) + rho(k, j)), -1.0, 1.0);
      rho(j, k) = v;
      rho(k, j) = v;
    }
  }
  return rho;
}

MatrixXd standardize_columns(const Eigen::Ref<const MatrixXd>& X) {
  MatrixXd centered = X.rowwise() - X.colwise().mean();
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt(centered.col(j).squaredNorm() / n);
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(j) + " has zero variance");
    centered.col(j) /= sd;
  }
  return centered;
}

}  // namespace doublethink::linmodel
