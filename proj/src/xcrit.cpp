#include "doublethink/xcrit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "doublethink/errors.hpp"
#include "doublethink/rng.hpp"

namespace doublethink::ctp {

double loggamma_tail(double x) {
  if (x <= 1.0) return 1.0;
  return std::erfc(std::sqrt(std::log(x)));
}

double loggamma_mean2_tail(double x) {
  if (x <= 1.0) return 1.0;
  // Substituting y = exp(u^2) turns the LG density into (2/sqrt(pi)) e^{-u^2};
  // for y >= 2x - 1 the partner term is certain.
  const double upper = std::sqrt(std::log(2.0 * x - 1.0));
  const double c = 2.0 / std::sqrt(std::numbers::pi);
  auto f = [&](double u) { return c * std::exp(-u * u) * loggamma_tail(2.0 * x - std::exp(u * u)); };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double body = integrator.integrate(f, 0.0, upper, 1e-13);
  return body + loggamma_tail(2.0 * x - 1.0);
}

XcritResult xcrit_threshold() {
  auto f = [](double x) { return loggamma_mean2_tail(x) - loggamma_tail(x); };
  std::uintmax_t iterations = 200;
  boost::math::tools::eps_tolerance<double> tol(48);
  std::pair<double, double> bracket;
  try {
    bracket = boost::math::tools::toms748_solve(f, 2.0, 100.0, tol, iterations);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConvergenceFailure, std::string("x_crit root bracket failed: ") + e.what());
  }
  if (iterations >= 200) throw Error(ErrorCode::ConvergenceFailure, "x_crit root finder did not converge");
  XcritResult out;
  out.x_crit = 0.5 * (bracket.first + bracket.second);
  out.tail_prob = loggamma_tail(out.x_crit);
  out.iterations = static_cast<int>(iterations);
  return out;
}

TailEstimate loggamma_mean_tail_mc(int k, double x, std::uint64_t draws, std::uint64_t seed) {
  if (k < 1 || draws == 0) throw Error(ErrorCode::InvalidArgument, "k and draws must be positive");
  // Fixed chunking keeps the estimate independent of the thread count.
  constexpr std::uint64_t kChunk = 1 << 16;
  const std::uint64_t chunks = (draws + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t c = w; c < chunks; c += workers) {
        auto rng = make_stream(seed, c, static_cast<std::uint64_t>(k));
        std::normal_distribution<double> z;
        const std::uint64_t end = std::min(draws, (c + 1) * kChunk);
        std::uint64_t count = 0;
        for (std::uint64_t i = c * kChunk; i < end; ++i) {
          double sum = 0.0;
          for (int j = 0; j < k; ++j) {
            const double g = z(rng);
            sum += std::exp(0.5 * g * g);
          }
          count += sum >= k * x;
        }
        hits[c] = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  TailEstimate out;
  out.draws = draws;
  out.p = static_cast<double>(total) / static_cast<double>(draws);
  out.se = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(draws));
  return out;
}

}  // namespace doublethink::ctp
