#include "doublethink/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "doublethink/errors.hpp"
#include "doublethink/subset_scanner.hpp"

namespace doublethink {

using inference::CoefficientEstimate;
using inference::Hyperparams;

ExhaustiveScan::ExhaustiveScan(std::vector<std::string> names, Hyperparams hyper, std::vector<double> log_mlr,
                               std::vector<double> log_po, std::vector<CoefficientEstimate> estimates)
    : names_(std::move(names)),
      hyper_(hyper),
      log_mlr_(std::move(log_mlr)),
      log_po_(std::move(log_po)),
      estimates_(std::move(estimates)) {
  if (names_.size() > static_cast<std::size_t>(ModelId::kMaxVariables))
    throw Error(ErrorCode::TooManyVariables, "at most 63 variables");
  const std::size_t expected = std::size_t{1} << names_.size();
  if (log_mlr_.size() != expected || log_po_.size() != expected)
    throw Error(ErrorCode::InvalidArgument, "scan tables must hold 2^nu entries");
  if (!estimates_.empty() && estimates_.size() != names_.size())
    throw Error(ErrorCode::InvalidArgument, "one estimate per variable is required");
}

namespace {

// Streaming PO-weighted moments over models. Weights are held relative to the
// running maximum log PO so no term overflows; excluded coefficients
// contribute a point mass at zero simply by not being added.
class MixtureAccumulator {
 public:
  MixtureAccumulator(int nu, double shrink)
      : shrink_(shrink), mean_(nu, 0.0), second_(nu, 0.0), bayes_second_(nu, 0.0), incl_(nu, 0.0) {}

  void add(double log_po, int size, const int* path, const double* beta, const double* var) {
    if (log_po > max_) {
      const double scale = std::isinf(max_) ? 0.0 : std::exp(max_ - log_po);
      total_ *= scale;
      for (std::size_t j = 0; j < mean_.size(); ++j) {
        mean_[j] *= scale;
        second_[j] *= scale;
        bayes_second_[j] *= scale;
        incl_[j] *= scale;
      }
      max_ = log_po;
    }
    const double w = std::exp(log_po - max_);
    total_ += w;
    for (int m = 0; m < size; ++m) {
      const int j = path[m];
      const double b2 = beta[m] * beta[m];
      mean_[j] += w * beta[m];
      second_[j] += w * (var[m] + b2);
      bayes_second_[j] += w * (shrink_ * var[m] + shrink_ * shrink_ * b2);
      incl_[j] += w;
    }
  }

  std::vector<CoefficientEstimate> finish() const {
    std::vector<CoefficientEstimate> out(mean_.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      auto& e = out[j];
      e.variable = static_cast<int>(j);
      e.classical_mean = mean_[j] / total_;
      e.classical_se = std::sqrt(std::max(0.0, second_[j] / total_ - e.classical_mean * e.classical_mean));
      e.bayes_mean = shrink_ * e.classical_mean;
      e.bayes_se = std::sqrt(std::max(0.0, bayes_second_[j] / total_ - e.bayes_mean * e.bayes_mean));
      e.inclusion_prob = incl_[j] / total_;
    }
    return out;
  }

 private:
  double shrink_;
  double max_ = -std::numeric_limits<double>::infinity();
  double total_ = 0.0;
  std::vector<double> mean_, second_, bayes_second_, incl_;
};

// Numerical zero for the residual sum of squares, relative to the
// nuisance-only fit.
constexpr double kDegenerateRss = 1e-12;

}  // namespace

ExhaustiveScan scan_all_models(const linmodel::Dataset& data, const Hyperparams& hyper, const ScanOptions& options) {
  hyper.validate();
  data.validate();
  const int nu = data.nu();
  if (nu > options.max_variables || nu > ModelId::kMaxVariables) {
    throw Error(ErrorCode::TooManyVariables,
                std::to_string(nu) + " candidate variables exceed the exhaustive-scan cap of " +
                    std::to_string(std::min(options.max_variables, ModelId::kMaxVariables)) +
                    "; select a subset first (see the `select` command) or raise the cap");
  }

  const auto resid = linmodel::residualize(data.X, data.y, data.nuisance_design());
  const auto scanner = linmodel::SubsetScanner::from_design(resid.X, linmodel::kRankTolerance);
  const Eigen::VectorXd cross = resid.X.transpose() * resid.y;
  const double rss_null = resid.y.squaredNorm();
  const double n = static_cast<double>(data.n());
  const auto* known = std::get_if<linmodel::KnownVariance>(&data.nuisance.variance);

  const std::size_t count = std::size_t{1} << nu;
  std::vector<double> log_mlr(count, 0.0);
  std::vector<double> log_po(count, 0.0);
  MixtureAccumulator mixture(nu, hyper.shrink());
  std::vector<double> beta(nu), var(nu);

  if (!known && !(rss_null > 0.0))
    throw Error(ErrorCode::DegenerateVariance, "outcome is fit exactly by the nuisance columns");

  scanner.for_each_model(cross, [&](const linmodel::SubsetScanner::ModelView& view) {
    double lm = 0.0;
    double sigma2 = 0.0;
    if (known) {
      sigma2 = known->sigma2;
      lm = view.explained / (2.0 * sigma2);
    } else {
      const double rss = rss_null - view.explained;
      if (!(rss > kDegenerateRss * rss_null))
        throw Error(ErrorCode::DegenerateVariance,
                    "model " + std::to_string(view.model.bits()) + " fits the outcome exactly");
      sigma2 = rss / n;
      lm = -0.5 * n * std::log1p(-view.explained / rss_null);
    }
    const double lp = inference::log_posterior_odds_model(lm, view.size, hyper);
    log_mlr[view.model.bits()] = lm;
    log_po[view.model.bits()] = lp;
    view.coefficients(beta.data(), var.data());
    for (int m = 0; m < view.size; ++m) var[m] *= sigma2;
    mixture.add(lp, view.size, view.path(), beta.data(), var.data());
  });

  return ExhaustiveScan(data.names, hyper, std::move(log_mlr), std::move(log_po), mixture.finish());
}

ExhaustiveScan rescore(const ExhaustiveScan& scan, const Hyperparams& hyper) {
  hyper.validate();
  std::vector<double> log_mlr(scan.log_mlr_values().begin(), scan.log_mlr_values().end());
  std::vector<double> log_po(log_mlr.size());
  for (std::size_t s = 0; s < log_mlr.size(); ++s)
    log_po[s] = inference::log_posterior_odds_model(log_mlr[s], ModelId(s).size(), hyper);
  return ExhaustiveScan(scan.names(), hyper, std::move(log_mlr), std::move(log_po), {});
}

}  // namespace doublethink
