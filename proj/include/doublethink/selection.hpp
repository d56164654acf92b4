#ifndef DOUBLETHINK_SELECTION_HPP
#define DOUBLETHINK_SELECTION_HPP

#include <vector>

#include "doublethink/linmodel.hpp"

namespace doublethink::ctp {

/// Likelihood-ratio p-value for dropping each variable from the grand
/// alternative, Pr(chi^2_1 >= 2 log R) with R the MLR of the full model
/// against the full model minus that variable. Throws RankDeficient when the
/// grand alternative cannot be fit.
std::vector<double> leave_one_out_tests(const linmodel::Dataset& data);

/// Single-variable likelihood-ratio p-values against the nuisance-only model.
std::vector<double> marginal_tests(const linmodel::Dataset& data);

/// Ranks variables by marginal p-value (ties by index) and admits them in
/// order, skipping any candidate whose |rho| exceeds rho_cap with two or more
/// already admitted variables, until max_vars are admitted.
std::vector<int> select_subset(const linmodel::Dataset& data, int max_vars, double rho_cap);

/// Copy of `data` restricted to the listed candidate columns, in list order.
linmodel::Dataset subset_columns(const linmodel::Dataset& data, const std::vector<int>& columns);

}  // namespace doublethink::ctp

#endif  // DOUBLETHINK_SELECTION_HPP
