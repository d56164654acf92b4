#ifndef DOUBLETHINK_SIMLAB_HPP
#define DOUBLETHINK_SIMLAB_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "doublethink/model_id.hpp"
#include "doublethink/scan.hpp"

namespace doublethink::simlab {

/// Binomial proportion with its standard error sqrt(p (1 - p) / trials).
struct Estimate {
  double p = 0.0;
  double se = 0.0;
  std::uint64_t events = 0;
  std::uint64_t trials = 0;

  static Estimate of(std::uint64_t events, std::uint64_t trials);
};

enum class TwoVarTarget { TestBeta1, GrandNull };

struct TwoVarConfig {
  double n = 145;
  double mu = 0.1;
  double h = 1.0;
  double tau = 9.0;
  double rho = 0.0;
  double sigma = 1.0;
  std::vector<double> beta2_grid{0.0};
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 1;
};

struct TwoVarPoint {
  double beta2 = 0.0;
  Estimate fpr;
  double reference = 0.0;  // asymptotic FWER bound with k = 1 or 2 tested variables
};

struct TwoVarReport {
  TwoVarTarget target = TwoVarTarget::TestBeta1;
  std::vector<TwoVarPoint> points;
};

/// False positive rate of the model-averaged test of beta_1 = 0 (TestBeta1)
/// or beta_1 = beta_2 = 0 (GrandNull, which ignores the grid and uses beta_2 =
/// 0), simulated directly on the standardized scores: W ~ N(0, 1) and
/// Z ~ N(sqrt(n) beta_2 / sigma, 1) with x_1's score sqrt(1 - rho^2) W + rho Z.
TwoVarReport sim_two_variable(const TwoVarConfig& cfg, TwoVarTarget target);

/// Same study at the data level: draws x_2 and x_1 with correlation rho,
/// y = beta_2 x_2 + sigma e, and fits all four models with known variance.
TwoVarReport sim_two_variable_data(const TwoVarConfig& cfg, TwoVarTarget target);

enum class DesignSource {
  Template,       // the supplied n x nu matrix, standardized once
  SyntheticCorr,  // rows drawn N(0, C) each replicate, then standardized
};

struct PriorSimConfig {
  int nu = 6;
  double mu = 0.1;
  double h = 1.0;
  double tau = 9.0;
  int n = 500;
  double sigma = 1.0;
  DesignSource source = DesignSource::SyntheticCorr;
  Eigen::MatrixXd design;  // Template: n x nu data; SyntheticCorr: nu x nu correlation (identity if empty)
  std::vector<double> rho_levels{1.0};
  std::uint64_t replicates = 10000;
  std::uint64_t seed = 1;
  int max_variables = kDefaultMaxVariables;
};

struct PriorRhoPoint {
  double rho = 1.0;
  Estimate bfwer;  // model-averaged PO of the admissible true-null intersection >= tau
  Estimate afwer;  // same on the sum of single-variable odds around the true model
};

struct PriorSimReport {
  std::vector<PriorRhoPoint> points;
  std::uint64_t replicates = 0;
  std::uint64_t grand_null_replicates = 0;
  // Marginal tests PO_{j} >= tau pooled over variables and replicates.
  std::uint64_t rejections = 0;
  double mean_post_null = 0.0;     // mean 1 / (1 + PO) among rejections
  double mean_post_null_se = 0.0;
  Estimate false_discovery;        // share of rejections whose variable is truly null
  double evalue_bound = 0.0;
  double fwer_threshold = 0.0;     // asymptotic bound at tau for nu variables
};

/// Draws inclusion from Bernoulli(mu / (1 + mu)) and the included
/// coefficients from N(0, sigma^2 / h R_incl^{-1}), with R the correlation of the
/// standardized design, simulates y = X beta + sigma e and scans all models
/// with known variance sigma^2. Throws ScanCapExceeded above the scan cap.
PriorSimReport sim_prior_bfwer(const PriorSimConfig& cfg);

/// Worst-case BFWER [(1 + mu/(1+mu))^nu - 1] / tau, capped at 1.
double evalue_bound(double mu, int nu, double tau);

/// Maps a scan to the set of individually rejected variables.
using Tester = std::function<ModelId(const ExhaustiveScan&)>;

/// Rejects variable j when the censored adjusted p-value of {j} is <= alpha.
Tester marginal_tester(double alpha);

/// Among prior replicates with at least one true signal, the share in which
/// no true-signal variable is rejected.
Estimate strikeout_rate(const PriorSimConfig& cfg, const Tester& tester);

}  // namespace doublethink::simlab

#endif  // DOUBLETHINK_SIMLAB_HPP
