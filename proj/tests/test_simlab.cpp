#include <cmath>
#include <random>

#include "doctest.h"

#include "doublethink/errors.hpp"
#include "doublethink/inference.hpp"
#include "doublethink/simlab.hpp"

using namespace doublethink;
using namespace doublethink::simlab;

namespace {

bool within(const Estimate& a, const Estimate& b, double k) {
  return std::abs(a.p - b.p) <= k * std::hypot(a.se, b.se) + 1e-12;
}

}  // namespace

TEST_CASE("binomial estimates") {
  const auto e = Estimate::of(25, 100);
  CHECK(e.p == 0.25);
  CHECK(e.se == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  CHECK(Estimate::of(0, 0).p == 0.0);
}

TEST_CASE("worst-case e-value bound") {
  // prior odds per variable mu, inclusion probability mu / (1 + mu)
  const double q = 0.1 / 1.1;
  CHECK(evalue_bound(0.1, 15, 9) == doctest::Approx((std::pow(1 + q, 15) - 1) / 9).epsilon(1e-12));
  CHECK(evalue_bound(1.0, 40, 9) == 1.0);
  CHECK(evalue_bound(0.1, 15, 9) / inference::fwer_threshold({0.1, 1, 9, 145}, 15) ==
        doctest::Approx(87).epsilon(0.03));
}

TEST_CASE("two-variable study is reproducible") {
  TwoVarConfig cfg;
  cfg.replicates = 20000;
  cfg.rho = 0.4;
  cfg.beta2_grid = {0.0, 0.1};
  const auto a = sim_two_variable(cfg, TwoVarTarget::TestBeta1);
  const auto b = sim_two_variable(cfg, TwoVarTarget::TestBeta1);
  REQUIRE(a.points.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.points[i].fpr.events == b.points[i].fpr.events);
  cfg.seed = 2;
  const auto c = sim_two_variable(cfg, TwoVarTarget::TestBeta1);
  CHECK(within(a.points[0].fpr, c.points[0].fpr, 4));

  const auto g = sim_two_variable(cfg, TwoVarTarget::GrandNull);
  REQUIRE(g.points.size() == 1);
  CHECK(g.points[0].beta2 == 0.0);
  CHECK(g.points[0].reference == doctest::Approx(inference::fwer_threshold({0.1, 1, 9, 145}, 2)));
  CHECK(a.points[0].reference == doctest::Approx(inference::fwer_threshold({0.1, 1, 9, 145}, 1)));
}

TEST_CASE("score-space and data-level simulations agree") {
  for (double rho : {0.0, 0.6}) {
    for (auto target : {TwoVarTarget::TestBeta1, TwoVarTarget::GrandNull}) {
      TwoVarConfig cfg;
      cfg.mu = 1.0;
      cfg.n = 200;
      cfg.rho = rho;
      cfg.beta2_grid = {0.15};
      cfg.replicates = 30000;
      const auto score = sim_two_variable(cfg, target);
      cfg.seed = 99;
      const auto data = sim_two_variable_data(cfg, target);
      CHECK(within(score.points[0].fpr, data.points[0].fpr, 4.5));
    }
  }
}

TEST_CASE("uncorrelated nuisance signal does not move the test of beta_1") {
  TwoVarConfig cfg;
  cfg.mu = 1.0;
  cfg.replicates = 50000;
  cfg.beta2_grid = {0.0, 0.5};
  const auto r = sim_two_variable(cfg, TwoVarTarget::TestBeta1);
  CHECK(within(r.points[0].fpr, r.points[1].fpr, 4));
}

TEST_CASE("prior-matched simulation") {
  PriorSimConfig cfg;
  cfg.nu = 4;
  cfg.n = 200;
  cfg.replicates = 3000;
  cfg.rho_levels = {0.0, 0.5, 1.0};
  const auto r = sim_prior_bfwer(cfg);
  REQUIRE(r.points.size() == 3);
  CHECK(r.replicates == 3000);
  CHECK(r.evalue_bound == doctest::Approx(evalue_bound(0.1, 4, 9)));
  CHECK(r.false_discovery.trials == r.rejections);
  for (const auto& pt : r.points) {
    CHECK(pt.bfwer.trials == 3000);
    CHECK(pt.bfwer.p <= r.evalue_bound + 3 * pt.bfwer.se);
    CHECK(pt.afwer.p >= 0.0);
  }
  if (r.rejections > 0) CHECK(r.mean_post_null <= inference::fdr_bound(9) + 1e-12);
  // grand null occurs with probability (1 + mu)^-nu
  const double p0 = std::pow(1.1, -4);
  const auto g = Estimate::of(r.grand_null_replicates, r.replicates);
  CHECK(std::abs(g.p - p0) < 4 * std::sqrt(p0 * (1 - p0) / 3000));

  const auto again = sim_prior_bfwer(cfg);
  CHECK(again.rejections == r.rejections);
  CHECK(again.points[1].bfwer.events == r.points[1].bfwer.events);
}

TEST_CASE("prior simulation on a template design") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  PriorSimConfig cfg;
  cfg.nu = 3;
  cfg.n = 120;
  cfg.source = DesignSource::Template;
  cfg.design.resize(120, 3);
  for (int i = 0; i < 120; ++i) {
    const double c = z(rng);
    for (int j = 0; j < 3; ++j) cfg.design(i, j) = c + z(rng);
  }
  cfg.replicates = 1000;
  const auto r = sim_prior_bfwer(cfg);
  CHECK(r.points.size() == 1);
  CHECK(r.points[0].bfwer.p <= r.evalue_bound + 3 * r.points[0].bfwer.se);
}

TEST_CASE("prior simulation errors") {
  PriorSimConfig cfg;
  cfg.nu = 8;
  cfg.max_variables = 6;
  try {
    sim_prior_bfwer(cfg);
    FAIL("expected ScanCapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScanCapExceeded);
  }
}

TEST_CASE("strikeout rate") {
  PriorSimConfig cfg;
  cfg.nu = 4;
  cfg.n = 100;
  cfg.replicates = 2000;
  const auto strict = strikeout_rate(cfg, marginal_tester(1e-6));
  const auto loose = strikeout_rate(cfg, marginal_tester(0.025));
  CHECK(strict.trials == loose.trials);
  CHECK(strict.trials > 0);
  CHECK(strict.p >= loose.p);
  CHECK(loose.p > 0.0);
  CHECK(loose.p < 1.0);
  const auto none = strikeout_rate(cfg, [](const ExhaustiveScan&) { return ModelId{}; });
  CHECK(none.p == 1.0);
}
