#ifndef DOUBLETHINK_INFERENCE_HPP
#define DOUBLETHINK_INFERENCE_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "doublethink/linmodel.hpp"
#include "doublethink/model_id.hpp"

namespace doublethink {

class ExhaustiveScan;

namespace inference {

/// Prior odds of inclusion per variable (mu), prior precision (h), posterior
/// odds rejection threshold (tau) and sample size (n).
struct Hyperparams {
  double mu = 0.1;
  double h = 1.0;
  double tau = 9.0;
  double n = 1.0;

  /// Shrinkage factor h / (n + h).
  double xi() const { return h / (n + h); }
  /// n / (n + h), the posterior shrinkage of estimates.
  double shrink() const { return n / (n + h); }
  /// log(mu * sqrt(xi)): per-variable log penalty on posterior odds.
  double log_unit_odds() const { return std::log(mu) + 0.5 * std::log(xi()); }

  /// Throws InvalidArgument unless every field is strictly positive.
  void validate() const;
};

/// log PO_s = |s| log mu + (|s|/2) log xi + (1 - xi) log R_s.
double log_posterior_odds_model(double log_mlr, int model_size, const Hyperparams& hyper);
double posterior_odds_model(const linmodel::FitResult& fit, const Hyperparams& hyper);

/// Johnson's likelihood-ratio Bayes factor xi^{|s|/2} R_s^{1 - xi}.
double log_bayes_factor(double log_mlr, int model_size, const Hyperparams& hyper);
double bayes_factor(const linmodel::FitResult& fit, const Hyperparams& hyper);

/// Intersection null that every coefficient in `tested` is zero.
struct NullHypothesis {
  ModelId tested;

  static NullHypothesis of(const std::vector<int>& indices) { return {ModelId::from_indices(indices)}; }
  int size() const { return tested.size(); }
};

/// log of sum_{s in A} PO_s / sum_{s in O} PO_s, where O holds the models that
/// exclude every tested variable and A the rest.
double log_model_averaged_po(const ExhaustiveScan& scan, const NullHypothesis& null);
double model_averaged_po(const ExhaustiveScan& scan, const NullHypothesis& null);

/// Unadjusted asymptotic p-value for a test of k variables. The odds are
/// scaled to the model-averaged MLR  PO / ((1 + mu sqrt(xi))^k - 1)  and the
/// deviance referred to chi^2_1; returns 1 when the MLR is at most 1.
double po_to_p_unadjusted_log(double log_po, int k, const Hyperparams& hyper);
double po_to_p_unadjusted(double po, int k, const Hyperparams& hyper);

/// Adjusted asymptotic p-value  Pr(chi^2_1 >= 2 log(PO / (nu mu sqrt(xi)))).
/// With `censor`, values above kCensorThreshold are reported as 1.
inline constexpr double kCensorThreshold = 0.025;
double po_to_p_adjusted_log(double log_po, int nu, const Hyperparams& hyper, bool censor = true);
double po_to_p_adjusted(double po, int nu, const Hyperparams& hyper, bool censor = true);

/// Inverse of po_to_p_unadjusted.
double p_to_po(double p, int k, const Hyperparams& hyper);
double p_to_log_po(double p, int k, const Hyperparams& hyper);

/// Asymptotic strong-sense FWER bound  Pr(chi^2_1 >= 2 log(tau / (nu mu sqrt(xi)))).
double fwer_threshold(const Hyperparams& hyper, int nu);
/// Bound on the Bayesian FDR implied by tau.
inline double fdr_bound(double tau) { return 1.0 / (1.0 + tau); }
/// Threshold tau whose FWER bound equals alpha (tau in `hyper` is ignored).
double tau_for_fwer(double alpha, int nu, const Hyperparams& hyper);

struct TestReport {
  double po = 0.0;
  double log_po = 0.0;
  double p_unadj = 1.0;
  double p_adj_raw = 1.0;
  double p_adj = 1.0;       // after censoring
  double fdr_bound = 1.0;   // 1 / (1 + po)
  bool rejected_bayes = false;
  bool rejected_freq = false;  // p_adj <= alpha
  int tested_count = 0;
  int nu_total = 0;
  bool sub_analysis = false;
  std::vector<std::string> excluded;  // sub-analysis: variables outside the scan, if named
  int excluded_count = 0;
};

/// Assembles the report for a model-averaged log posterior odds against a
/// null of `k` tested variables out of `nu_total`. p_adj_raw never falls
/// below p_unadj.
TestReport make_report(double log_po, int k, int nu_total, const Hyperparams& hyper, double alpha);

struct CoefficientEstimate {
  int variable = 0;
  double classical_mean = 0.0;
  double classical_se = 0.0;
  double bayes_mean = 0.0;
  double bayes_se = 0.0;
  double inclusion_prob = 0.0;
};

/// Estimates under one fixed model: MLE and sqrt of inverse observed
/// information, and the posterior mean/sd shrunk by n/(n+h). Variables absent
/// from the model get zeros and inclusion probability 0.
std::vector<CoefficientEstimate> model_estimates(const linmodel::FitResult& fit, int nu, const Hyperparams& hyper);

/// Posterior-odds-weighted mixture over all models (computed during the scan).
const std::vector<CoefficientEstimate>& coefficient_estimates(const ExhaustiveScan& scan);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};
struct IntervalPair {
  Interval classical;  // 100(1 - alpha)% confidence interval
  Interval bayes;      // 100(1 - 1/(1+tau))% credibility interval
};

/// Mean +/- z * se for both estimates. Exact per model; for mixture estimates
/// this is a normal approximation to the mixture.
IntervalPair intervals(const CoefficientEstimate& est, double alpha, double tau);

/// Classical power of the Bayesian test of k extra parameters:
/// Pr(chi^2_k >= (1 + n/h)^{-1} Q_{chi^2_k}(1 - 1/(1+tau))).
double classical_power(int k, const Hyperparams& hyper);

}  // namespace inference
}  // namespace doublethink

#endif  // DOUBLETHINK_INFERENCE_HPP
