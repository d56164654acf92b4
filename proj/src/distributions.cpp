#include "doublethink/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doublethink/errors.hpp"

namespace doublethink {

double chisq1_upper_tail(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

double chisq1_upper_quantile(double p) {
  if (!(p > 0.0) || p > 1.0) throw Error(ErrorCode::InvalidArgument, "chi-squared tail probability must lie in (0, 1]");
  if (p == 1.0) return 0.0;
  const double z = boost::math::erfc_inv(p);
  return 2.0 * z * z;
}

double chisq_upper_tail(double x, double k) {
  if (!(x > 0.0)) return 1.0;
  if (k == 1.0) return chisq1_upper_tail(x);
  return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

double chisq_upper_quantile(double p, double k) {
  if (!(p > 0.0) || p > 1.0) throw Error(ErrorCode::InvalidArgument, "chi-squared tail probability must lie in (0, 1]");
  if (p == 1.0) return 0.0;
  if (k == 1.0) return chisq1_upper_quantile(p);
  return 2.0 * boost::math::gamma_q_inv(0.5 * k, p);
}

double normal_upper_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw Error(ErrorCode::InvalidArgument, "normal tail probability must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double landau_upper_tail(double z) {
  const double x = 0.5 * std::numbers::pi * z + std::log(0.5 * std::numbers::pi);
  // Below -4 the survival function differs from 1 by < 2e-10 and the
  // integrand grows like exp(e^(-x-1)), so the quadrature is not attempted.
  if (x < -4.0) return 1.0;
  auto integrand = [x](double t) {
    if (t <= 0.0) return std::numbers::pi;
    return std::exp(-t * std::log(t) - x * t) * std::sin(std::numbers::pi * t) / t;
  };
  // Integrate up to where the log envelope -t log t - x t has dropped below
  // -50 past its maximum at t = exp(-x - 1).
  double upper = std::max(1.0, std::exp(-x - 1.0));
  while (-upper * std::log(upper) - x * upper > -50.0) upper *= 1.25;
  if (x > 1.0) upper = std::min(upper, std::max(1.0, 60.0 / x));
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double total = Quad::integrate(integrand, 0.0, upper, 12, 1e-12);
  return std::clamp(total / std::numbers::pi, 0.0, 1.0);
}

}  // namespace doublethink
