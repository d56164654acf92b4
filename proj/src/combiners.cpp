#include "doublethink/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doublethink/distributions.hpp"
#include "doublethink/errors.hpp"

namespace doublethink::ctp {

namespace {

void check(std::span<const double> pvals) {
  if (pvals.empty()) throw Error(ErrorCode::EmptyInput, "no p-values to combine");
  for (double p : pvals)
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p-values must lie in (0, 1]");
}

}  // namespace

double combine_bonferroni(std::span<const double> pvals) {
  check(pvals);
  return std::min(1.0, pvals.size() * *std::min_element(pvals.begin(), pvals.end()));
}

double combine_simes(std::span<const double> pvals) {
  check(pvals);
  std::vector<double> sorted(pvals.begin(), pvals.end());
  std::sort(sorted.begin(), sorted.end());
  const double k = static_cast<double>(sorted.size());
  double out = 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) out = std::min(out, sorted[i] * k / static_cast<double>(i + 1));
  return out;
}

double combine_hmp(std::span<const double> pvals, std::span<const double> weights) {
  check(pvals);
  const std::size_t L = pvals.size();
  if (!weights.empty()) {
    if (weights.size() != L) throw Error(ErrorCode::InvalidArgument, "one weight per p-value is required");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
  }
  if (L == 1) return pvals[0];

  double inv_h = 0.0;
  for (std::size_t i = 0; i < L; ++i) inv_h += (weights.empty() ? 1.0 / L : weights[i]) / pvals[i];
  const double scale = 0.5 * std::numbers::pi;
  const double p = landau_upper_tail((inv_h - std::log(static_cast<double>(L)) - kHmpLocation) / scale);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace doublethink::ctp
