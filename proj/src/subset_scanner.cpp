#include "doublethink/subset_scanner.hpp"

namespace doublethink::linmodel {

SubsetScanner::SubsetScanner(Eigen::MatrixXd gram, double rank_tolerance)
    : gram_(std::move(gram)), tolerance_(rank_tolerance) {
  if (gram_.rows() != gram_.cols()) throw Error(ErrorCode::InvalidArgument, "Gram matrix must be square");
  if (gram_.rows() > ModelId::kMaxVariables) throw Error(ErrorCode::TooManyVariables, "at most 63 candidate variables");
}

SubsetScanner SubsetScanner::from_design(const Eigen::Ref<const Eigen::MatrixXd>& residualized,
                                         double relative_tolerance) {
  const double max_norm = residualized.cols() > 0 ? residualized.colwise().norm().maxCoeff() : 0.0;
  return SubsetScanner(residualized.transpose() * residualized, relative_tolerance * max_norm);
}

Residualized residualize(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& nuisance) {
  Residualized out{X, y};
  if (nuisance.cols() == 0) return out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(nuisance);
  if (qr.rank() < nuisance.cols()) throw Error(ErrorCode::RankDeficient, "nuisance columns are collinear");
  out.X -= nuisance * qr.solve(X);
  out.y -= nuisance * qr.solve(y);
  return out;
}

}  // namespace doublethink::linmodel
