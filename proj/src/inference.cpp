#include "doublethink/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doublethink/distributions.hpp"
#include "doublethink/errors.hpp"
#include "doublethink/scan.hpp"

namespace doublethink::inference {

void Hyperparams::validate() const {
  if (!(mu > 0.0) || !(h > 0.0) || !(tau > 0.0) || !(n > 0.0) || !std::isfinite(mu) || !std::isfinite(h) ||
      !std::isfinite(n))
    throw Error(ErrorCode::InvalidArgument, "hyperparameters mu, h, tau and n must be positive");
}

double log_bayes_factor(double log_mlr, int model_size, const Hyperparams& hyper) {
  const double xi = hyper.xi();
  return 0.5 * model_size * std::log(xi) + (1.0 - xi) * log_mlr;
}

double log_posterior_odds_model(double log_mlr, int model_size, const Hyperparams& hyper) {
  return model_size * std::log(hyper.mu) + log_bayes_factor(log_mlr, model_size, hyper);
}

double posterior_odds_model(const linmodel::FitResult& fit, const Hyperparams& hyper) {
  return std::exp(log_posterior_odds_model(fit.log_mlr, fit.model.size(), hyper));
}

double bayes_factor(const linmodel::FitResult& fit, const Hyperparams& hyper) {
  return std::exp(log_bayes_factor(fit.log_mlr, fit.model.size(), hyper));
}

double log_model_averaged_po(const ExhaustiveScan& scan, const NullHypothesis& null) {
  if (null.tested.is_null()) throw Error(ErrorCode::EmptyTestedSet, "the tested set must be nonempty");
  if (!null.tested.subset_of(ModelId::full(scan.nu())))
    throw Error(ErrorCode::InvalidArgument, "tested set references a variable outside the scan");

  const auto lp = scan.log_po_values();
  const ModelId::Bits mask = null.tested.bits();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double max_alt = kNegInf;
  double max_null = kNegInf;
  for (std::size_t s = 0; s < lp.size(); ++s) {
    if (s & mask)
      max_alt = std::max(max_alt, lp[s]);
    else
      max_null = std::max(max_null, lp[s]);
  }
  double sum_alt = 0.0;
  double sum_null = 0.0;
  for (std::size_t s = 0; s < lp.size(); ++s) {
    if (s & mask)
      sum_alt += std::exp(lp[s] - max_alt);
    else
      sum_null += std::exp(lp[s] - max_null);
  }
  return (max_alt + std::log(sum_alt)) - (max_null + std::log(sum_null));
}

double model_averaged_po(const ExhaustiveScan& scan, const NullHypothesis& null) {
  return std::exp(log_model_averaged_po(scan, null));
}

namespace {

void require_count(int k, const char* what) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be at least 1");
}

// log((1 + c)^k - 1) with c = mu sqrt(xi).
double log_unadjusted_scale(int k, const Hyperparams& hyper) {
  const double c = std::exp(hyper.log_unit_odds());
  return std::log(std::expm1(k * std::log1p(c)));
}

double log_adjusted_scale(int nu, const Hyperparams& hyper) { return std::log(nu) + hyper.log_unit_odds(); }

double deviance_tail(double log_ratio) {
  if (!(log_ratio > 0.0)) return 1.0;
  return chisq1_upper_tail(2.0 * log_ratio);
}

}  // namespace

double po_to_p_unadjusted_log(double log_po, int k, const Hyperparams& hyper) {
  require_count(k, "tested variable count");
  return deviance_tail(log_po - log_unadjusted_scale(k, hyper));
}

double po_to_p_unadjusted(double po, int k, const Hyperparams& hyper) {
  return po_to_p_unadjusted_log(std::log(po), k, hyper);
}

double po_to_p_adjusted_log(double log_po, int nu, const Hyperparams& hyper, bool censor) {
  require_count(nu, "nu");
  const double p = deviance_tail(log_po - log_adjusted_scale(nu, hyper));
  return (censor && p > kCensorThreshold) ? 1.0 : p;
}

double po_to_p_adjusted(double po, int nu, const Hyperparams& hyper, bool censor) {
  return po_to_p_adjusted_log(std::log(po), nu, hyper, censor);
}

double p_to_log_po(double p, int k, const Hyperparams& hyper) {
  require_count(k, "tested variable count");
  if (!(p > 0.0) || p > 1.0) throw Error(ErrorCode::InvalidArgument, "p-value must lie in (0, 1]");
  return log_unadjusted_scale(k, hyper) + 0.5 * chisq1_upper_quantile(p);
}

double p_to_po(double p, int k, const Hyperparams& hyper) { return std::exp(p_to_log_po(p, k, hyper)); }

double fwer_threshold(const Hyperparams& hyper, int nu) {
  require_count(nu, "nu");
  return deviance_tail(std::log(hyper.tau) - log_adjusted_scale(nu, hyper));
}

double tau_for_fwer(double alpha, int nu, const Hyperparams& hyper) {
  require_count(nu, "nu");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  return std::exp(log_adjusted_scale(nu, hyper) + 0.5 * chisq1_upper_quantile(alpha));
}

TestReport make_report(double log_po, int k, int nu_total, const Hyperparams& hyper, double alpha) {
  TestReport r;
  r.log_po = log_po;
  r.po = std::exp(log_po);
  r.tested_count = k;
  r.nu_total = nu_total;
  r.p_unadj = po_to_p_unadjusted_log(log_po, k, hyper);
  r.p_adj_raw = std::max(po_to_p_adjusted_log(log_po, nu_total, hyper, false), r.p_unadj);
  r.p_adj = r.p_adj_raw > kCensorThreshold ? 1.0 : r.p_adj_raw;
  // 1 / (1 + e^lp) without overflow
  r.fdr_bound = log_po > 0.0 ? std::exp(-log_po) / (1.0 + std::exp(-log_po)) : 1.0 / (1.0 + std::exp(log_po));
  r.rejected_bayes = log_po >= std::log(hyper.tau);
  r.rejected_freq = r.p_adj <= alpha;
  return r;
}

std::vector<CoefficientEstimate> model_estimates(const linmodel::FitResult& fit, int nu, const Hyperparams& hyper) {
  std::vector<CoefficientEstimate> out(nu);
  for (int j = 0; j < nu; ++j) out[j].variable = j;
  const Eigen::MatrixXd cov = fit.coefficient_covariance();
  const double c = hyper.shrink();
  const auto idx = fit.model.indices();
  for (std::size_t m = 0; m < idx.size(); ++m) {
    auto& e = out[idx[m]];
    const auto mi = static_cast<Eigen::Index>(m);
    e.classical_mean = fit.beta_hat(mi);
    e.classical_se = std::sqrt(cov(mi, mi));
    e.bayes_mean = c * e.classical_mean;
    e.bayes_se = std::sqrt(c) * e.classical_se;
    e.inclusion_prob = 1.0;
  }
  return out;
}

const std::vector<CoefficientEstimate>& coefficient_estimates(const ExhaustiveScan& scan) {
  if (scan.estimates().empty() && scan.nu() > 0)
    throw Error(ErrorCode::InvalidArgument, "scan carries no mixture estimates (rescored scans drop them)");
  return scan.estimates();
}

IntervalPair intervals(const CoefficientEstimate& est, double alpha, double tau) {
  const double z_classical = normal_upper_quantile(0.5 * alpha);
  const double z_bayes = normal_upper_quantile(0.5 / (1.0 + tau));
  return {{est.classical_mean - z_classical * est.classical_se, est.classical_mean + z_classical * est.classical_se},
          {est.bayes_mean - z_bayes * est.bayes_se, est.bayes_mean + z_bayes * est.bayes_se}};
}

double classical_power(int k, const Hyperparams& hyper) {
  require_count(k, "dimension");
  const double q = chisq_upper_quantile(1.0 / (1.0 + hyper.tau), k);
  return chisq_upper_tail(q / (1.0 + hyper.n / hyper.h), k);
}

}  // namespace doublethink::inference
