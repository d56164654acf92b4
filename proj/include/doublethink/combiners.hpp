#ifndef DOUBLETHINK_COMBINERS_HPP
#define DOUBLETHINK_COMBINERS_HPP

#include <span>

namespace doublethink::ctp {

/// min(1, k * min p).
double combine_bonferroni(std::span<const double> pvals);

/// min over i of p_(i) * k / i for the ascending order statistics.
double combine_simes(std::span<const double> pvals);

/// Harmonic mean p-value. With H = 1 / sum_i w_i / p_i over L tests, 1/H - log L
/// is asymptotically Landau with location kHmpLocation and scale pi/2, so
/// p = Pr(Landau >= (1/H - log L - kHmpLocation) / (pi/2)). Weights default
/// to uniform and must sum to 1. A single p-value is returned unchanged.
double combine_hmp(std::span<const double> pvals, std::span<const double> weights = {});

/// 1 + digamma(1) - log(2/pi).
inline constexpr double kHmpLocation = 1.0 - 0.57721566490153286061 + 0.45158270528945486473;

}  // namespace doublethink::ctp

#endif  // DOUBLETHINK_COMBINERS_HPP
