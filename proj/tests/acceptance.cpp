// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]; no argument runs all of them.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doublethink/ctp.hpp"
#include "doublethink/inference.hpp"
#include "doublethink/linmodel.hpp"
#include "doublethink/scan.hpp"
#include "doublethink/simlab.hpp"
#include "doublethink/xcrit.hpp"

using namespace doublethink;
using inference::Hyperparams;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  std::printf("    %s %s\n", ok ? "ok  " : "MISS", buf);
  o.pass = o.pass && ok;
}

// Random Gaussian design with exchangeable correlation and a sparse signal.
linmodel::Dataset random_data(std::mt19937_64& rng, int n, int nu) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = 0.6 * u(rng);
  linmodel::Dataset d;
  d.X.resize(n, nu);
  d.y.resize(n);
  std::vector<double> beta(nu);
  for (auto& b : beta) b = u(rng) < 0.4 ? 0.5 * z(rng) : 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = z(rng);
    double m = 0.0;
    for (int j = 0; j < nu; ++j) {
      d.X(i, j) = std::sqrt(rho) * c + std::sqrt(1 - rho) * z(rng);
      m += beta[j] * d.X(i, j);
    }
    d.y(i) = m + z(rng);
  }
  for (int j = 0; j < nu; ++j) d.names.push_back("x" + std::to_string(j + 1));
  return d;
}

Outcome conversions() {
  Outcome o;
  const Hyperparams hp{0.1, 1.0, 9.0, 145.0};
  struct Case {
    const char* label;
    double value, target, unit;
  };
  const Case cases[] = {
      {"PO 1.75, k=1", inference::po_to_p_unadjusted(1.75, 1, hp), 0.001, 0.001},
      {"PO 0.58, k=1", inference::po_to_p_unadjusted(0.58, 1, hp), 0.004, 0.001},
      {"PO 3688, k=15", inference::po_to_p_unadjusted(3688, 15, hp), 6.0e-6, 0.1e-6},
      {"PO 3688, nu=49 adjusted", inference::po_to_p_adjusted(3688, 49, hp), 2.0e-5, 0.1e-5},
      {"PO 89, k=2", inference::po_to_p_unadjusted(89, 2, hp), 3.4e-5, 0.1e-5},
      {"PO 89, nu=49 adjusted", inference::po_to_p_adjusted(89, 49, hp), 1.0e-3, 0.1e-3},
  };
  for (const auto& c : cases)
    note(o, std::abs(c.value - c.target) <= c.unit * (1 + 1e-9), "%-24s p = %.4g  (expected %.2g +/- %.1g)", c.label,
         c.value, c.target, c.unit);
  return o;
}

Outcome xcrit() {
  Outcome o;
  const auto r = ctp::xcrit_threshold();
  note(o, std::abs(r.x_crit - 11.92362) <= 1e-3, "x_crit = %.7f  (expected 11.92362 +/- 1e-3)", r.x_crit);
  note(o, std::abs(r.tail_prob - 0.0259846) <= 1e-5, "tail = %.8f  (expected 0.0259846 +/- 1e-5)", r.tail_prob);
  note(o, std::abs(ctp::loggamma_mean2_tail(r.x_crit) - r.tail_prob) <= 1e-10, "mean-of-two tail at root = %.10f",
       ctp::loggamma_mean2_tail(r.x_crit));
  const auto mc = ctp::loggamma_mean_tail_mc(2, r.x_crit, 10'000'000, 20240601);
  const double z = (mc.p - r.tail_prob) / mc.se;
  note(o, std::abs(z) <= 3, "Monte Carlo (1e7 draws) = %.7f +/- %.7f, z = %.2f", mc.p, mc.se, z);
  return o;
}

Outcome fpr_trend() {
  Outcome o;
  simlab::TwoVarConfig cfg;
  cfg.mu = 1.0;
  cfg.h = 1.0;
  cfg.tau = 9.0;
  cfg.rho = 0.0;
  cfg.replicates = 1'000'000;
  double gap_small = 0, gap_large = 0, fpr_large = 0, ref_large = 0;
  for (double n : {1e2, 1e4}) {
    cfg.n = n;
    cfg.seed = static_cast<std::uint64_t>(n);
    const auto r = simlab::sim_two_variable(cfg, simlab::TwoVarTarget::GrandNull);
    const auto& pt = r.points.front();
    std::printf("    n = %-6g FPR = %.6f +/- %.6f  bound = %.6f\n", n, pt.fpr.p, pt.fpr.se, pt.reference);
    (n < 1e3 ? gap_small : gap_large) = std::abs(pt.fpr.p - pt.reference);
    if (n > 1e3) fpr_large = pt.fpr.p, ref_large = pt.reference;
  }
  note(o, gap_large < gap_small, "|FPR - bound| shrinks: %.6f at n=1e2, %.6f at n=1e4", gap_small, gap_large);
  const double ratio = fpr_large / ref_large;
  note(o, ratio <= 1.5 && ratio >= 1 / 1.5, "FPR / bound at n=1e4 = %.4f (within a factor 1.5)", ratio);
  return o;
}

Outcome evalue_ratio() {
  Outcome o;
  const double e = simlab::evalue_bound(0.1, 15, 9);
  const double f = inference::fwer_threshold({0.1, 1.0, 9.0, 145.0}, 15);
  note(o, std::abs(e / f - 87) <= 2, "e-value bound %.5f / FWER bound %.6f = %.2f  (expected 87 +/- 2)", e, f, e / f);
  return o;
}

Outcome bayes_fdr() {
  Outcome o;
  simlab::PriorSimConfig cfg;
  cfg.nu = 6;
  cfg.n = 500;
  cfg.mu = 0.1;
  cfg.h = 1.0;
  cfg.tau = 9.0;
  cfg.rho_levels = {0.0, 0.5, 1.0};
  cfg.replicates = 100'000;
  cfg.seed = 7;
  const auto r = simlab::sim_prior_bfwer(cfg);
  const double bound = inference::fdr_bound(cfg.tau);
  note(o, r.mean_post_null <= bound + 3 * r.mean_post_null_se,
       "mean posterior null among %llu rejections = %.5f +/- %.5f  (bound %.5f)",
       static_cast<unsigned long long>(r.rejections), r.mean_post_null, r.mean_post_null_se, bound);
  std::printf("    empirical false-discovery share = %.5f +/- %.5f\n", r.false_discovery.p, r.false_discovery.se);
  for (const auto& pt : r.points)
    note(o, pt.bfwer.p <= r.evalue_bound + 3 * pt.bfwer.se, "rho = %.1f BFWER = %.5f +/- %.5f  (e-value bound %.5f)",
         pt.rho, pt.bfwer.p, pt.bfwer.se, r.evalue_bound);
  return o;
}

Outcome monotonicity() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> nu_dist(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long checks = 0, violations = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int nu = nu_dist(rng);
    auto d = random_data(rng, 40 + rep % 60, nu);
    const Hyperparams hp{0.02 + u(rng), 0.5 + 2 * u(rng), 9.0, static_cast<double>(d.n())};
    const auto scan = scan_all_models(d, hp);
    const std::uint64_t full = std::uint64_t{1} << nu;
    std::vector<double> lp(full);
    for (std::uint64_t t = 1; t < full; ++t) lp[t] = inference::log_model_averaged_po(scan, {ModelId(t)});
    // every edge T -> T + {j} of the subset lattice; chains are paths along these edges
    for (std::uint64_t t = 1; t < full; ++t)
      for (int j = 0; j < nu; ++j) {
        if (t >> j & 1) continue;
        ++checks;
        const double drop = lp[t] - lp[t | (std::uint64_t{1} << j)];
        if (drop > 0) {
          ++violations;
          worst = std::max(worst, drop);
        }
      }
  }
  note(o, violations == 0, "%ld nested pairs over 200 datasets, %ld decreases (largest %.3g in log odds)", checks,
       violations, worst);
  return o;
}

// Independent refit: unpivoted Householder QR of [nuisance | X_s] and the
// closed-form log likelihood ratio.
double oracle_log_mlr(const linmodel::Dataset& d, ModelId s) {
  const auto nuis = d.nuisance_design();
  auto rss_of = [&](const Eigen::MatrixXd& A) {
    if (A.cols() == 0) return d.y.squaredNorm();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::VectorXd fitted = A * qr.solve(d.y);
    return (d.y - fitted).squaredNorm();
  };
  const auto idx = s.indices();
  Eigen::MatrixXd A(d.n(), nuis.cols() + static_cast<long>(idx.size()));
  A.leftCols(nuis.cols()) = nuis;
  for (std::size_t k = 0; k < idx.size(); ++k) A.col(nuis.cols() + k) = d.X.col(idx[k]);
  const double rss0 = rss_of(nuis), rss1 = rss_of(A);
  if (const auto* known = std::get_if<linmodel::KnownVariance>(&d.nuisance.variance))
    return (rss0 - rss1) / (2 * known->sigma2);
  return 0.5 * d.n() * std::log(rss0 / rss1);
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::normal_distribution<double> z;
  double worst = 0.0;
  long entries = 0;
  for (int rep = 0; rep < 24; ++rep) {
    const int nu = 2 + rep % 9;
    auto d = random_data(rng, 30 + 20 * (rep % 5), nu);
    d.nuisance.intercept = rep % 2 == 0;
    if (rep % 3 == 0) {
      d.nuisance.extra_columns.resize(d.n(), 1);
      for (int i = 0; i < d.n(); ++i) d.nuisance.extra_columns(i, 0) = z(rng);
    }
    if (rep % 4 == 1) d.nuisance.variance = linmodel::KnownVariance{0.5 + rep * 0.1};
    const auto scan = scan_all_models(d, {0.1, 1.0, 9.0, static_cast<double>(d.n())});
    for (std::uint64_t s = 0; s < scan.model_count(); ++s) {
      const double ref = oracle_log_mlr(d, ModelId(s));
      worst = std::max(worst, std::abs(scan.log_mlr(ModelId(s)) - ref) / std::max(1.0, std::abs(ref)));
      ++entries;
    }
  }
  note(o, worst <= 1e-9, "%ld scan entries vs independent refit: worst relative gap %.2e", entries, worst);

  // nu = 3: classify every model into the null/alternative sets by hand
  double worst_po = 0.0;
  int tests = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = random_data(rng, 60, 3);
    const auto scan = scan_all_models(d, {0.1 + 0.05 * (rep % 5), 1.0, 9.0, 60.0});
    for (std::uint64_t t = 1; t < 8; ++t) {
      double alt = 0.0, null = 0.0;
      for (std::uint64_t s = 0; s < 8; ++s) {
        const bool in_null = (s & t) == 0;
        const double po = std::exp(scan.log_po(ModelId(s)));
        (in_null ? null : alt) += po;
      }
      const double got = inference::model_averaged_po(scan, {ModelId(t)});
      worst_po = std::max(worst_po, std::abs(got - alt / null) / (alt / null));
      ++tests;
    }
  }
  note(o, worst_po <= 1e-12, "%d nu=3 tests vs set-classification oracle: worst relative gap %.2e", tests, worst_po);
  return o;
}

Outcome roundtrips() {
  Outcome o;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_p = 0.0, worst_a = 0.0;
  const int draws = 100'000;
  for (int i = 0; i < draws; ++i) {
    const Hyperparams hp{0.005 + 2 * u(rng), 0.1 + 10 * u(rng), 9.0, 10 + 1e5 * u(rng)};
    const int k = 1 + static_cast<int>(40 * u(rng));
    const double p = std::pow(10.0, -14 * u(rng));
    const double back = inference::po_to_p_unadjusted(inference::p_to_po(p, k, hp), k, hp);
    worst_p = std::max(worst_p, std::abs(back - p) / p);
    const double alpha = std::pow(10.0, -10 * u(rng) - 0.5);
    const int nu = 1 + static_cast<int>(60 * u(rng));
    Hyperparams with_tau = hp;
    with_tau.tau = inference::tau_for_fwer(alpha, nu, hp);
    const double a_back = inference::fwer_threshold(with_tau, nu);
    worst_a = std::max(worst_a, std::abs(a_back - alpha) / alpha);
  }
  note(o, worst_p <= 1e-10, "p -> PO -> p over %d draws: worst relative error %.2e", draws, worst_p);
  note(o, worst_a <= 1e-10, "alpha -> tau -> alpha over %d draws: worst relative error %.2e", draws, worst_a);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "odds to p-value conversions", conversions},
      {2, "critical point of the log-gamma tail comparison", xcrit},
      {3, "two-variable false positive rate approaches its bound", fpr_trend},
      {4, "e-value bound inflation ratio", evalue_ratio},
      {5, "Bayesian FDR and FWER under the prior", bayes_fdr},
      {6, "shortcut monotonicity over nested tested sets", monotonicity},
      {7, "scan and model averaging against independent oracles", oracle_equivalence},
      {8, "p-value and threshold roundtrips", roundtrips},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    std::printf("[%d] %s\n", c.id, c.name);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      std::printf("    error: %s\n", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
