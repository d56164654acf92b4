#ifndef DOUBLETHINK_DISTRIBUTIONS_HPP
#define DOUBLETHINK_DISTRIBUTIONS_HPP

// Tail probabilities and quantiles used throughout. Upper tails are computed
// directly (erfc / regularized upper gamma) so far-tail p-values keep full
// relative precision instead of cancelling against 1.

namespace doublethink {

/// Pr(chi^2_1 >= x). Returns 1 for x <= 0.
double chisq1_upper_tail(double x);

/// x such that Pr(chi^2_1 >= x) = p, for p in (0, 1].
double chisq1_upper_quantile(double p);

/// Pr(chi^2_k >= x).
double chisq_upper_tail(double x, double k);

/// x such that Pr(chi^2_k >= x) = p.
double chisq_upper_quantile(double p, double k);

/// z such that Pr(Z >= z) = p for standard normal Z.
double normal_upper_quantile(double p);

double normal_upper_tail(double z);

/// Survival function of the standard Landau distribution in the stable
/// parameterization (characteristic exponent |t| (1 + i (2/pi) sign(t) log|t|)).
/// Computed from the classical Laplace form at u = (pi/2) x + log(pi/2):
/// (1/pi) * int_0^inf exp(-t log t - u t) sin(pi t) / t dt.
double landau_upper_tail(double x);

}  // namespace doublethink

#endif  // DOUBLETHINK_DISTRIBUTIONS_HPP
