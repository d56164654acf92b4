#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "doublethink/combiners.hpp"
#include "doublethink/ctp.hpp"
#include "doublethink/distributions.hpp"
#include "doublethink/errors.hpp"
#include "doublethink/scan.hpp"
#include "doublethink/selection.hpp"
#include "doublethink/xcrit.hpp"
#include "support.hpp"

using namespace doublethink;
using namespace doublethink::ctp;
using inference::NullHypothesis;

namespace {

linmodel::CorrelationMatrix corr_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int p = static_cast<int>(rows.size());
  linmodel::CorrelationMatrix c(p, p);
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) c(i, j++) = v;
    ++i;
  }
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("grouping at several thresholds") {
  const auto c = corr_from({{1, 0.9, 0.1, 0.0}, {0.9, 1, 0.6, 0.0}, {0.1, 0.6, 1, -0.85}, {0.0, 0.0, -0.85, 1}});

  auto g = build_grouping(c, 1.0);
  CHECK(g.blocks.size() == 4);

  g = build_grouping(c, 0.8);
  REQUIRE(g.blocks.size() == 2);
  CHECK(g.blocks[0] == std::vector<int>{0, 1});
  CHECK(g.blocks[1] == std::vector<int>{2, 3});
  CHECK(g.block_of == std::vector<int>{0, 0, 1, 1});

  // transitive chaining through x2
  g = build_grouping(c, 0.5);
  CHECK(g.blocks.size() == 1);

  g = build_grouping(c, 0.0);
  CHECK(g.blocks.size() == 1);

  CHECK(code_of([&] { build_grouping(c, 1.5); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_grouping(c, -0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("admissibility matches the maximum split correlation") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = testing::random_dataset(rng, 30, 5, 0.5);
    const auto c = linmodel::correlation_matrix(d);
    for (double rho : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      const auto g = build_grouping(c, rho);
      for (std::uint64_t t = 1; t < 32; ++t) {
        const NullHypothesis null{ModelId(t)};
        const bool adm = is_admissible(null, g);
        CHECK(adm == (max_split_correlation(null, c) <= rho));
        CHECK(adm == !violating_block(null, g).has_value());
      }
    }
  }
  const auto c = corr_from({{1, 0.3}, {0.3, 1}});
  CHECK(max_split_correlation(NullHypothesis::of({0, 1}), c) == 0.0);
}

TEST_CASE("group tests") {
  std::mt19937_64 rng(12);
  auto d = testing::random_dataset(rng, 80, 4, 0.0, {0.0, 0.6, 0.0, 0.0});
  d.X.col(0) = d.X.col(1) + 0.2 * d.X.col(0);
  const auto scan = scan_all_models(d, {0.1, 1, 9, 80});
  AnalysisContext ctx{&scan, linmodel::correlation_matrix(d)};

  SUBCASE("matches the model-averaged odds") {
    const auto r = test_group(ctx, {1, 2}, {});
    CHECK(r.log_po == doctest::Approx(inference::log_model_averaged_po(scan, NullHypothesis::of({1, 2}))));
    CHECK(r.tested_count == 2);
    CHECK(r.nu_total == 4);
    CHECK_FALSE(r.sub_analysis);
  }
  SUBCASE("inadmissible split is refused unless bypassed") {
    TestOptions opts;
    opts.rho = 0.8;
    CHECK(code_of([&] { test_group(ctx, {1}, opts); }) == ErrorCode::InadmissibleGroup);
    CHECK_NOTHROW(test_group(ctx, {0, 1}, opts));
    opts.bypass_admissibility = true;
    CHECK_NOTHROW(test_group(ctx, {1}, opts));
  }
  SUBCASE("input errors") {
    CHECK(code_of([&] { test_group(ctx, {7}, {}); }) == ErrorCode::UnknownVariables);
    CHECK(code_of([&] { test_group(ctx, {}, {}); }) == ErrorCode::EmptyTestedSet);
    CHECK(code_of([&] { resolve_names(scan.names(), {"x2", "nope"}); }) == ErrorCode::UnknownVariables);
    CHECK(resolve_names(scan.names(), {"x3", "x1", "x3"}) == std::vector<int>{0, 2});
  }
  SUBCASE("tau override") {
    TestOptions opts;
    opts.tau = 1e12;
    const auto r = test_group(ctx, {0, 1, 2, 3}, opts);
    CHECK(r.rejected_bayes == (r.log_po >= std::log(1e12)));
  }
  SUBCASE("sub-analysis uses the declared total") {
    AnalysisContext sub = ctx;
    sub.declared_nu = 40;
    sub.excluded = {"z1", "z2"};
    const auto full = test_group(ctx, {1}, {});
    const auto r = test_group(sub, {1}, {});
    CHECK(r.sub_analysis);
    CHECK(r.nu_total == 40);
    CHECK(r.excluded == std::vector<std::string>{"z1", "z2"});
    CHECK(r.excluded_count == 36);
    CHECK(r.log_po == full.log_po);
    CHECK(r.p_adj_raw >= full.p_adj_raw);
  }
}

namespace {

// Exhaustive oracle: every admissible set of size <= max_size reaching tau
// with no admissible proper subset reaching tau.
std::vector<std::vector<int>> brute_minimal(const ExhaustiveScan& scan, const GroupingPolicy& g, double tau,
                                            int max_size) {
  const int nu = scan.nu();
  std::vector<std::uint64_t> hits;
  for (std::uint64_t t = 1; t < (1ull << nu); ++t) {
    const NullHypothesis null{ModelId(t)};
    if (null.size() > max_size || !is_admissible(null, g)) continue;
    if (inference::log_model_averaged_po(scan, null) >= std::log(tau)) hits.push_back(t);
  }
  std::vector<std::vector<int>> out;
  for (auto t : hits) {
    bool minimal = true;
    for (auto u : hits) minimal = minimal && !(u != t && (u & ~t) == 0);
    if (minimal) out.push_back(ModelId(t).indices());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace

TEST_CASE("minimal significant groups agree with exhaustive enumeration") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  int nonempty = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const int nu = 3 + rep % 5;
    std::vector<double> beta(nu);
    for (auto& b : beta) b = u(rng);
    const auto d = testing::random_dataset(rng, 50, nu, 0.4, beta);
    const auto scan = scan_all_models(d, {0.2, 1, 9, 50});
    const AnalysisContext ctx{&scan, linmodel::correlation_matrix(d)};
    for (double rho : {0.3, 0.6, 1.0}) {
      const auto g = build_grouping(ctx.corr, rho);
      for (double tau : {3.0, 9.0, 100.0}) {
        const auto got = minimal_significant_groups(ctx, rho, tau, nu);
        CHECK(got == brute_minimal(scan, g, tau, nu));
        nonempty += !got.empty();
        const auto capped = minimal_significant_groups(ctx, rho, tau, 2);
        CHECK(capped == brute_minimal(scan, g, tau, 2));
      }
    }
  }
  CHECK(nonempty > 20);
}

TEST_CASE("minimal group search respects its node budget") {
  std::mt19937_64 rng(14);
  const auto d = testing::random_dataset(rng, 40, 10, 0.0);
  const auto scan = scan_all_models(d, {0.1, 1, 9, 40});
  const AnalysisContext ctx{&scan, linmodel::correlation_matrix(d)};
  CHECK(code_of([&] { minimal_significant_groups(ctx, 1.0, 1e30, 10, 5); }) == ErrorCode::SearchBudgetExceeded);
}

TEST_CASE("Bonferroni and Simes") {
  const std::vector<double> p{0.01, 0.04, 0.03, 0.5};
  CHECK(combine_bonferroni(p) == doctest::Approx(0.04));
  CHECK(combine_simes(p) == doctest::Approx(0.04));  // min(0.04, 0.06, 0.053, 0.5)
  CHECK(combine_simes(std::vector<double>{0.2}) == 0.2);
  CHECK(combine_bonferroni(std::vector<double>{0.4, 0.5, 0.6}) == 1.0);
  CHECK(code_of([] { combine_simes(std::vector<double>{}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { combine_bonferroni(std::vector<double>{0.0}); }) == ErrorCode::InvalidArgument);
  for (int k = 2; k < 12; ++k) {
    std::vector<double> q(k, 0.3);
    q[0] = 0.001;
    CHECK(combine_simes(q) <= combine_bonferroni(q));
  }
}

TEST_CASE("Landau tail") {
  const std::pair<double, double> ref[] = {{-3, 0.9999999999996342}, {-1, 0.9038390389593682},
                                           {0, 0.6347612984876252},  {1, 0.42213324035804767},
                                           {2, 0.2958921379557912},  {5, 0.1411957729191379},
                                           {20, 0.03447191412562978}, {100, 0.006538466629667619},
                                           {1000, 0.000639256548462073}};
  for (auto [x, sf] : ref) CHECK(landau_upper_tail(x) == doctest::Approx(sf).epsilon(1e-7));
}

TEST_CASE("harmonic mean p-value") {
  CHECK(combine_hmp(std::vector<double>{0.037}) == 0.037);

  // calibration under the null: simulated uniform p-values
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int L = 50, reps = 40000;
  int below = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> p(L);
    for (auto& v : p) v = 1.0 - unif(rng);
    below += combine_hmp(p) <= 0.05;
  }
  const double rate = static_cast<double>(below) / reps;
  CHECK(std::abs(rate - 0.05) < 4 * std::sqrt(0.05 * 0.95 / reps) + 0.005);

  // weighted: a zero weight drops a p-value
  const std::vector<double> p{0.01, 0.9, 0.02};
  const std::vector<double> w{0.5, 0.0, 0.5};
  CHECK(combine_hmp(p, w) == doctest::Approx(combine_hmp(std::vector<double>{0.01, 0.02})).epsilon(0.5));
  CHECK(code_of([&] { combine_hmp(p, std::vector<double>{0.5, 0.5, 0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { combine_hmp(p, std::vector<double>{0.5, 0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { combine_hmp(std::vector<double>{}); }) == ErrorCode::EmptyInput);
  CHECK(combine_hmp(std::vector<double>{1e-8, 0.5, 0.5}) < 1e-7);
}

TEST_CASE("log-gamma tails") {
  for (double x : {1.5, 3.0, 10.0, 40.0})
    CHECK(loggamma_tail(x) == doctest::Approx(chisq1_upper_tail(2 * std::log(x))).epsilon(1e-12));
  CHECK(loggamma_tail(1.0) == 1.0);
  CHECK(loggamma_mean2_tail(1.0) == doctest::Approx(1.0));

  for (double x : {2.0, 5.0, 12.0, 30.0}) {
    const auto mc = loggamma_mean_tail_mc(2, x, 2'000'000, 21);
    CHECK(std::abs(loggamma_mean2_tail(x) - mc.p) < 4 * mc.se);
  }
  // single draw MC agrees with the closed form
  const auto one = loggamma_mean_tail_mc(1, 4.0, 1'000'000, 22);
  CHECK(std::abs(one.p - loggamma_tail(4.0)) < 4 * one.se);
  // same seed, same estimate
  CHECK(loggamma_mean_tail_mc(2, 5.0, 300'000, 9).p == loggamma_mean_tail_mc(2, 5.0, 300'000, 9).p);
}

TEST_CASE("critical point of the mean of two") {
  const auto r = xcrit_threshold();
  CHECK(loggamma_mean2_tail(r.x_crit) == doctest::Approx(loggamma_tail(r.x_crit)).epsilon(1e-9));
  CHECK(r.tail_prob == doctest::Approx(loggamma_tail(r.x_crit)));
  // heavier below the crossing, lighter above
  CHECK(loggamma_mean2_tail(r.x_crit - 2) > loggamma_tail(r.x_crit - 2));
  CHECK(loggamma_mean2_tail(r.x_crit + 2) < loggamma_tail(r.x_crit + 2));
  CHECK(r.x_crit > 11.9);
  CHECK(r.x_crit < 11.95);
}

TEST_CASE("variable screens") {
  std::mt19937_64 rng(16);
  auto d = testing::random_dataset(rng, 200, 6, 0.0, {0.0, 0.0, 0.5, 0.0, 0.0, 0.3});
  // x2 nearly duplicates x1 and x3
  d.X.col(1) = d.X.col(0) + d.X.col(2) * 0.0 + 0.05 * d.X.col(1);

  SUBCASE("marginal tests match single-variable fits") {
    const auto p = marginal_tests(d);
    for (int j = 0; j < 6; ++j) {
      const auto fit = linmodel::fit_submodel(d, ModelId::from_indices({j}));
      CHECK(p[j] == doctest::Approx(chisq1_upper_tail(2 * fit.log_mlr)).epsilon(1e-12));
    }
  }
  SUBCASE("leave-one-out tests") {
    const auto p = leave_one_out_tests(d);
    const auto full = linmodel::fit_submodel(d, ModelId::full(6));
    for (int j = 0; j < 6; ++j) {
      const auto drop = linmodel::fit_submodel(d, ModelId::full(6).without(j));
      CHECK(p[j] == doctest::Approx(chisq1_upper_tail(2 * (full.log_mlr - drop.log_mlr))).epsilon(1e-12));
    }
    CHECK(p[2] < 1e-4);
  }
  SUBCASE("selection") {
    const auto sel = select_subset(d, 3, 0.8);
    REQUIRE(sel.size() == 3);
    CHECK(sel[0] == 2);
    const auto sub = subset_columns(d, sel);
    CHECK(sub.X.cols() == 3);
    CHECK(sub.names[0] == "x3");
    CHECK(sub.X.col(0) == d.X.col(2));
    // no admitted variable is highly correlated with two others
    const auto c = linmodel::correlation_matrix(sub);
    for (int i = 0; i < 3; ++i) {
      int high = 0;
      for (int j = 0; j < 3; ++j) high += i != j && std::abs(c(i, j)) > 0.8;
      CHECK(high < 2);
    }
  }
}
