#ifndef DOUBLETHINK_XCRIT_HPP
#define DOUBLETHINK_XCRIT_HPP

#include <cstdint>

namespace doublethink::ctp {

// X ~ LG(1/2, 1) means log X ~ Gamma(shape 1/2, rate 1), i.e. X = exp(chi^2_1 / 2).

/// Pr(X >= x) = Pr(chi^2_1 >= 2 log x).
double loggamma_tail(double x);

/// Pr((X_1 + X_2) / 2 >= x) for iid X_i ~ LG(1/2, 1), by quadrature of the
/// convolution.
double loggamma_mean2_tail(double x);

struct XcritResult {
  double x_crit = 0.0;
  double tail_prob = 0.0;  // Pr(X >= x_crit)
  int iterations = 0;
};

/// Point x > 1 where the mean of two LG(1/2, 1) variables starts to have a
/// lighter tail than a single one: the root of
/// Pr(mean of 2 >= x) - Pr(X >= x) on [2, 100]. Throws ConvergenceFailure.
XcritResult xcrit_threshold();

/// Monte Carlo estimate of Pr(mean of k iid LG(1/2, 1) >= x).
struct TailEstimate {
  double p = 0.0;
  double se = 0.0;
  std::uint64_t draws = 0;
};
TailEstimate loggamma_mean_tail_mc(int k, double x, std::uint64_t draws, std::uint64_t seed);

}  // namespace doublethink::ctp

#endif  // DOUBLETHINK_XCRIT_HPP
