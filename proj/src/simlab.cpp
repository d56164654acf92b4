#include "doublethink/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "doublethink/ctp.hpp"
#include "doublethink/errors.hpp"
#include "doublethink/inference.hpp"
#include "doublethink/linmodel.hpp"
#include "doublethink/rng.hpp"

namespace doublethink::simlab {

Estimate Estimate::of(std::uint64_t events, std::uint64_t trials) {
  Estimate e;
  e.events = events;
  e.trials = trials;
  if (trials > 0) {
    e.p = static_cast<double>(events) / static_cast<double>(trials);
    e.se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(trials));
  }
  return e;
}

namespace {

// Runs fn(chunk, stream, begin, end) over fixed-size chunks of replicates on
// all cores and merges the per-chunk tallies in chunk order.
template <class Tally, class Fn>
Tally run_chunked(std::uint64_t replicates, std::uint64_t seed, std::uint64_t point, Fn fn) {
  constexpr std::uint64_t kChunk = 256;
  const std::uint64_t chunks = (replicates + kChunk - 1) / kChunk;
  std::vector<Tally> tallies(chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
      try {
        auto rng = make_stream(seed, point, c);
        tallies[c] = fn(rng, c * kChunk, std::min(replicates, (c + 1) * kChunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), chunks));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  Tally total{};
  for (const auto& t : tallies) total += t;
  return total;
}

struct Count {
  std::uint64_t events = 0;
  Count& operator+=(const Count& o) {
    events += o.events;
    return *this;
  }
};

double log_sum_exp(std::initializer_list<double> xs) {
  const double m = std::max(xs);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inference::Hyperparams two_var_hyper(const TwoVarConfig& cfg) {
  inference::Hyperparams hyper{cfg.mu, cfg.h, cfg.tau, cfg.n};
  hyper.validate();
  return hyper;
}

void check_two_var(const TwoVarConfig& cfg) {
  if (cfg.replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  if (!(std::abs(cfg.rho) <= 1.0)) throw Error(ErrorCode::InvalidArgument, "|rho| must be at most 1");
  if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
}

std::vector<double> grid_for(const TwoVarConfig& cfg, TwoVarTarget target) {
  if (target == TwoVarTarget::GrandNull) return {0.0};
  if (cfg.beta2_grid.empty()) throw Error(ErrorCode::InvalidArgument, "beta2 grid is empty");
  return cfg.beta2_grid;
}

double two_var_reference(const inference::Hyperparams& hyper, TwoVarTarget target) {
  return inference::fwer_threshold(hyper, target == TwoVarTarget::GrandNull ? 2 : 1);
}

}  // namespace

TwoVarReport sim_two_variable(const TwoVarConfig& cfg, TwoVarTarget target) {
  check_two_var(cfg);
  const auto hyper = two_var_hyper(cfg);
  const double c = hyper.log_unit_odds();
  const double a = 1.0 - hyper.xi();
  const double log_tau = std::log(cfg.tau);
  const double rc = std::sqrt(1.0 - cfg.rho * cfg.rho);

  TwoVarReport report;
  report.target = target;
  const auto grid = grid_for(cfg, target);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double shift = std::sqrt(cfg.n) * grid[g] / cfg.sigma;
    const auto hits = run_chunked<Count>(cfg.replicates, cfg.seed, g, [&](std::mt19937_64& rng, std::uint64_t begin,
                                                                          std::uint64_t end) {
      std::normal_distribution<double> normal;
      Count out;
      for (std::uint64_t r = begin; r < end; ++r) {
        const double w = normal(rng);
        const double z = normal(rng) + shift;
        const double s1 = rc * w + cfg.rho * z;
        const double l11 = 2.0 * c + 0.5 * a * (w * w + z * z);
        const double l10 = c + 0.5 * a * s1 * s1;
        const double l01 = c + 0.5 * a * z * z;
        const double lpo = target == TwoVarTarget::GrandNull ? log_sum_exp({l11, l10, l01})
                                                             : log_sum_exp({l11, l10}) - log_sum_exp({l01, 0.0});
        out.events += lpo >= log_tau;
      }
      return out;
    });
    report.points.push_back({grid[g], Estimate::of(hits.events, cfg.replicates), two_var_reference(hyper, target)});
  }
  return report;
}

TwoVarReport sim_two_variable_data(const TwoVarConfig& cfg, TwoVarTarget target) {
  check_two_var(cfg);
  const auto hyper = two_var_hyper(cfg);
  const int n = static_cast<int>(cfg.n);
  if (n < 3 || n != cfg.n) throw Error(ErrorCode::InvalidArgument, "data-level simulation needs an integer n >= 3");
  const double rc = std::sqrt(1.0 - cfg.rho * cfg.rho);
  const double log_tau = std::log(cfg.tau);
  const auto null = inference::NullHypothesis::of(target == TwoVarTarget::GrandNull ? std::vector<int>{0, 1}
                                                                                      : std::vector<int>{0});

  TwoVarReport report;
  report.target = target;
  const auto grid = grid_for(cfg, target);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double beta2 = grid[g];
    const auto hits = run_chunked<Count>(cfg.replicates, cfg.seed, g, [&](std::mt19937_64& rng, std::uint64_t begin,
                                                                          std::uint64_t end) {
      std::normal_distribution<double> normal;
      linmodel::Dataset data;
      data.names = {"x1", "x2"};
      data.nuisance.variance = linmodel::KnownVariance{cfg.sigma * cfg.sigma};
      data.X.resize(n, 2);
      data.y.resize(n);
      Count out;
      for (std::uint64_t r = begin; r < end; ++r) {
        for (int i = 0; i < n; ++i) {
          const double x2 = normal(rng);
          data.X(i, 0) = cfg.rho * x2 + rc * normal(rng);
          data.X(i, 1) = x2;
          data.y(i) = beta2 * x2 + cfg.sigma * normal(rng);
        }
        const auto scan = scan_all_models(data, hyper);
        out.events += inference::log_model_averaged_po(scan, null) >= log_tau;
      }
      return out;
    });
    report.points.push_back({beta2, Estimate::of(hits.events, cfg.replicates), two_var_reference(hyper, target)});
  }
  return report;
}

double evalue_bound(double mu, int nu, double tau) {
  if (!(mu > 0.0) || nu < 1 || !(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu, nu and tau must be positive");
  return std::min(1.0, std::expm1(nu * std::log1p(mu / (1.0 + mu))) / tau);
}

namespace {

// Design and prior draws shared by the BFWER and strikeout studies.
class PriorSampler {
 public:
  explicit PriorSampler(const PriorSimConfig& cfg) : cfg_(cfg), hyper_{cfg.mu, cfg.h, cfg.tau, 1.0} {
    if (cfg.nu < 1) throw Error(ErrorCode::InvalidArgument, "nu must be at least 1");
    if (cfg.nu > cfg.max_variables || cfg.nu > ModelId::kMaxVariables)
      throw Error(ErrorCode::ScanCapExceeded, std::to_string(cfg.nu) + " variables exceed the scan cap of " +
                                                  std::to_string(cfg.max_variables));
    if (cfg.replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
    if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (cfg.source == DesignSource::Template) {
      if (cfg.design.cols() != cfg.nu) throw Error(ErrorCode::InvalidArgument, "template design must have nu columns");
      n_ = static_cast<int>(cfg.design.rows());
      fixed_x_ = linmodel::standardize_columns(cfg.design);
      fixed_corr_ = linmodel::correlation_matrix(fixed_x_);
    } else {
      n_ = cfg.n;
      const Eigen::MatrixXd c = cfg.design.size() ? cfg.design : Eigen::MatrixXd::Identity(cfg.nu, cfg.nu);
      if (c.rows() != cfg.nu || c.cols() != cfg.nu)
        throw Error(ErrorCode::InvalidArgument, "synthetic correlation must be nu x nu");
      Eigen::LLT<Eigen::MatrixXd> llt(c);
      if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidArgument, "synthetic correlation must be positive definite");
      chol_ = llt.matrixL();
    }
    if (n_ < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
    hyper_.n = n_;
    hyper_.validate();
  }

  const inference::Hyperparams& hyper() const { return hyper_; }

  struct Draw {
    linmodel::Dataset data;
    linmodel::CorrelationMatrix corr;
    ModelId truth;
  };

  void draw(std::mt19937_64& rng, Draw& out) const {
    std::normal_distribution<double> normal;
    std::bernoulli_distribution include(cfg_.mu / (1.0 + cfg_.mu));
    const int nu = cfg_.nu;
    if (out.data.names.empty()) {
      for (int j = 0; j < nu; ++j) out.data.names.push_back("x" + std::to_string(j + 1));
      out.data.nuisance.variance = linmodel::KnownVariance{cfg_.sigma * cfg_.sigma};
    }
    if (cfg_.source == DesignSource::Template) {
      out.data.X = fixed_x_;
      out.corr = fixed_corr_;
    } else {
      Eigen::MatrixXd g(n_, nu);
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
      out.data.X = linmodel::standardize_columns(g * chol_.transpose());
      out.corr = linmodel::correlation_matrix(out.data.X);
    }

    ModelId truth;
    for (int j = 0; j < nu; ++j)
      if (include(rng)) truth = truth.with(j);
    out.truth = truth;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(nu);
    const auto idx = truth.indices();
    if (!idx.empty()) {
      const auto k = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd r(k, k);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) r(a, b) = out.corr(idx[a], idx[b]);
      Eigen::VectorXd z(k);
      for (Eigen::Index a = 0; a < k; ++a) z(a) = normal(rng);
      // cov = sigma^2 / h * R^{-1} via the transposed inverse Cholesky factor
      const Eigen::VectorXd b = Eigen::LLT<Eigen::MatrixXd>(r).matrixU().solve(z) * (cfg_.sigma / std::sqrt(cfg_.h));
      for (Eigen::Index a = 0; a < k; ++a) beta(idx[a]) = b(a);
    }
    out.data.y = out.data.X * beta;
    for (int i = 0; i < n_; ++i) out.data.y(i) += cfg_.sigma * normal(rng);
  }

 private:
  const PriorSimConfig& cfg_;
  inference::Hyperparams hyper_;
  int n_ = 0;
  Eigen::MatrixXd fixed_x_;
  linmodel::CorrelationMatrix fixed_corr_;
  Eigen::MatrixXd chol_;
};

struct PriorTally {
  std::vector<std::uint64_t> bfwer, afwer;
  std::uint64_t grand_null = 0;
  std::uint64_t rejections = 0;
  std::uint64_t false_rejections = 0;
  double post_null = 0.0;
  double post_null_sq = 0.0;

  PriorTally& operator+=(const PriorTally& o) {
    if (bfwer.empty()) {
      bfwer.assign(o.bfwer.size(), 0);
      afwer.assign(o.afwer.size(), 0);
    }
    for (std::size_t i = 0; i < o.bfwer.size(); ++i) {
      bfwer[i] += o.bfwer[i];
      afwer[i] += o.afwer[i];
    }
    grand_null += o.grand_null;
    rejections += o.rejections;
    false_rejections += o.false_rejections;
    post_null += o.post_null;
    post_null_sq += o.post_null_sq;
    return *this;
  }
};

}  // namespace

PriorSimReport sim_prior_bfwer(const PriorSimConfig& cfg) {
  const PriorSampler sampler(cfg);
  const auto& hyper = sampler.hyper();
  for (double rho : cfg.rho_levels)
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho levels must lie in [0, 1]");
  const double log_tau = std::log(cfg.tau);
  const std::size_t levels = cfg.rho_levels.size();
  const ScanOptions options{cfg.max_variables};

  const auto tally = run_chunked<PriorTally>(cfg.replicates, cfg.seed, 0, [&](std::mt19937_64& rng,
                                                                              std::uint64_t begin, std::uint64_t end) {
    PriorTally out;
    out.bfwer.assign(levels, 0);
    out.afwer.assign(levels, 0);
    PriorSampler::Draw draw;
    for (std::uint64_t r = begin; r < end; ++r) {
      sampler.draw(rng, draw);
      const auto scan = scan_all_models(draw.data, hyper, options);
      const ModelId truth = draw.truth;
      const ModelId true_null(ModelId::full(cfg.nu).bits() & ~truth.bits());
      out.grand_null += truth.is_null();

      for (std::size_t l = 0; l < levels; ++l) {
        const auto policy = ctp::build_grouping(draw.corr, cfg.rho_levels[l]);
        ModelId tested;
        for (const auto& block : policy.blocks) {
          const auto b = ModelId::from_indices(block);
          if (b.subset_of(true_null)) tested = ModelId(tested.bits() | b.bits());
        }
        if (tested.is_null()) continue;
        out.bfwer[l] += inference::log_model_averaged_po(scan, {tested}) >= log_tau;
        double m = -std::numeric_limits<double>::infinity();
        for (int j : tested.indices()) m = std::max(m, scan.log_po(truth.with(j)));
        double s = 0.0;
        for (int j : tested.indices()) s += std::exp(scan.log_po(truth.with(j)) - m);
        out.afwer[l] += m + std::log(s) - scan.log_po(truth) >= log_tau;
      }

      for (int j = 0; j < cfg.nu; ++j) {
        const double lp = inference::log_model_averaged_po(scan, {ModelId().with(j)});
        if (lp < log_tau) continue;
        const double q = 1.0 / (1.0 + std::exp(lp));
        ++out.rejections;
        out.false_rejections += !truth.contains(j);
        out.post_null += q;
        out.post_null_sq += q * q;
      }
    }
    return out;
  });

  PriorSimReport report;
  report.replicates = cfg.replicates;
  report.grand_null_replicates = tally.grand_null;
  for (std::size_t l = 0; l < levels; ++l)
    report.points.push_back({cfg.rho_levels[l], Estimate::of(tally.bfwer[l], cfg.replicates),
                             Estimate::of(tally.afwer[l], cfg.replicates)});
  report.rejections = tally.rejections;
  report.false_discovery = Estimate::of(tally.false_rejections, tally.rejections);
  if (tally.rejections > 0) {
    const double k = static_cast<double>(tally.rejections);
    report.mean_post_null = tally.post_null / k;
    const double var = std::max(0.0, tally.post_null_sq / k - report.mean_post_null * report.mean_post_null);
    report.mean_post_null_se = std::sqrt(var / k);
  }
  report.evalue_bound = evalue_bound(cfg.mu, cfg.nu, cfg.tau);
  report.fwer_threshold = inference::fwer_threshold(hyper, cfg.nu);
  return report;
}

Tester marginal_tester(double alpha) {
  return [alpha](const ExhaustiveScan& scan) {
    ModelId out;
    for (int j = 0; j < scan.nu(); ++j) {
      const double lp = inference::log_model_averaged_po(scan, {ModelId().with(j)});
      if (inference::po_to_p_adjusted_log(lp, scan.nu(), scan.hyper()) <= alpha) out = out.with(j);
    }
    return out;
  };
}

Estimate strikeout_rate(const PriorSimConfig& cfg, const Tester& tester) {
  const PriorSampler sampler(cfg);
  const ScanOptions options{cfg.max_variables};
  struct Tally {
    std::uint64_t with_signal = 0;
    std::uint64_t struck = 0;
    Tally& operator+=(const Tally& o) {
      with_signal += o.with_signal;
      struck += o.struck;
      return *this;
    }
  };
  const auto tally = run_chunked<Tally>(cfg.replicates, cfg.seed, 0, [&](std::mt19937_64& rng, std::uint64_t begin,
                                                                         std::uint64_t end) {
    Tally out;
    PriorSampler::Draw draw;
    for (std::uint64_t r = begin; r < end; ++r) {
      sampler.draw(rng, draw);
      if (draw.truth.is_null()) continue;
      const auto scan = scan_all_models(draw.data, sampler.hyper(), options);
      ++out.with_signal;
      out.struck += !tester(scan).intersects(draw.truth);
    }
    return out;
  });
  return Estimate::of(tally.struck, tally.with_signal);
}

}  // namespace doublethink::simlab
