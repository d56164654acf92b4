#ifndef DOUBLETHINK_LINMODEL_HPP
#define DOUBLETHINK_LINMODEL_HPP

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "doublethink/model_id.hpp"

namespace doublethink::linmodel {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct KnownVariance {
  double sigma2 = 1.0;
};
struct ProfiledVariance {};

using VarianceMode = std::variant<KnownVariance, ProfiledVariance>;

inline bool is_profiled(const VarianceMode& mode) { return std::holds_alternative<ProfiledVariance>(mode); }

/// Always-included covariates. zeta counts the intercept, every extra column
/// and, when profiled, the error variance.
struct NuisanceSpec {
  bool intercept = false;
  MatrixXd extra_columns;  // n x m, may have zero columns
  VarianceMode variance = ProfiledVariance{};

  int zeta() const {
    return static_cast<int>(intercept) + static_cast<int>(extra_columns.cols()) + (is_profiled(variance) ? 1 : 0);
  }
};

struct Dataset {
  VectorXd y;
  MatrixXd X;  // n x nu candidate variables
  std::vector<std::string> names;
  NuisanceSpec nuisance;

  int n() const { return static_cast<int>(y.size()); }
  int nu() const { return static_cast<int>(X.cols()); }

  /// The n x (intercept + extra) matrix of nuisance columns.
  MatrixXd nuisance_design() const;

  /// Throws InvalidArgument when shapes disagree, a candidate column is all
  /// zero, or the profiled likelihood has no residual degrees of freedom.
  void validate() const;
};

struct FitResult {
  ModelId model;
  VectorXd beta_hat;      // MLE over model.indices(), in index order
  VectorXd nuisance_hat;  // intercept first, then extra columns
  double rss = 0.0;
  double rss_null = 0.0;
  double sigma2 = 0.0;  // known sigma^2, or the MLE RSS/n when profiled
  double log_mlr = 0.0;
  // Observed information over [included candidates..., nuisance columns...]
  // at the MLE. The error variance is orthogonal to the mean parameters and
  // is left out of this block.
  MatrixXd obs_info;

  /// Inverse observed information restricted to the candidate coefficients.
  MatrixXd coefficient_covariance() const;
};

/// Relative rank tolerance for the column-pivoted QR, against the largest
/// column norm of the design.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares fit of model s plus all nuisance columns, and the maximized
/// log-likelihood ratio against the nuisance-only model.
FitResult fit_submodel(const Dataset& data, ModelId s);

using CorrelationMatrix = MatrixXd;

/// Pearson correlations between the columns of X.
CorrelationMatrix correlation_matrix(const Eigen::Ref<const MatrixXd>& X);
inline CorrelationMatrix correlation_matrix(const Dataset& data) { return correlation_matrix(data.X); }

/// Scales each column of X to mean zero and unit (population) variance.
MatrixXd standardize_columns(const Eigen::Ref<const MatrixXd>& X);

}  // namespace doublethink::linmodel

#endif  // DOUBLETHINK_LINMODEL_HPP
