#ifndef DOUBLETHINK_CTP_HPP
#define DOUBLETHINK_CTP_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "doublethink/inference.hpp"
#include "doublethink/linmodel.hpp"
#include "doublethink/model_id.hpp"
#include "doublethink/scan.hpp"

namespace doublethink::ctp {

/// Indivisible blocks of variables: connected components of the graph whose
/// edges join pairs with |rho_jk| > threshold. Blocks are listed by their
/// smallest member and hold sorted indices.
struct GroupingPolicy {
  double rho = 1.0;
  std::vector<std::vector<int>> blocks;
  std::vector<int> block_of;  // variable -> block index

  int nu() const { return static_cast<int>(block_of.size()); }
};

GroupingPolicy build_grouping(const linmodel::CorrelationMatrix& corr, double rho);

/// True iff the tested set splits no block. Equivalent to rho^max <= rho.
bool is_admissible(const inference::NullHypothesis& null, const GroupingPolicy& policy);

/// First block split by the tested set, if any.
std::optional<std::vector<int>> violating_block(const inference::NullHypothesis& null, const GroupingPolicy& policy);

/// Maximum |rho_jk| over pairs with one variable tested and the other free;
/// 0 for the grand null and the empty set.
double max_split_correlation(const inference::NullHypothesis& null, const linmodel::CorrelationMatrix& corr);

/// What a scan needs to answer group tests: the scan itself, the correlation
/// matrix for grouping, and the sub-analysis declaration. When
/// `declared_nu` exceeds the scanned variable count, rejections are
/// intersections with the excluded variables and adjusted p-values use
/// `declared_nu`.
struct AnalysisContext {
  const ExhaustiveScan* scan = nullptr;
  linmodel::CorrelationMatrix corr;
  int declared_nu = 0;                 // 0 means the scan's nu (full analysis)
  std::vector<std::string> excluded;   // optional names of excluded variables

  int nu_total() const;
  bool sub_analysis() const { return nu_total() > scan->nu(); }
};

struct TestOptions {
  double rho = 1.0;
  double alpha = inference::kCensorThreshold;
  std::optional<double> tau;     // overrides the scan's tau when set
  bool bypass_admissibility = false;
};

/// Model-averaged test of the intersection null over `tested`.
/// Throws UnknownVariables for out-of-range indices and InadmissibleGroup when
/// the set splits a block at options.rho.
inference::TestReport test_group(const AnalysisContext& ctx, const std::vector<int>& tested, const TestOptions& options);

/// Resolves variable names to indices; throws UnknownVariables listing misses.
std::vector<int> resolve_names(const std::vector<std::string>& names, const std::vector<std::string>& requested);

inline constexpr std::size_t kDefaultSearchBudget = 1'000'000;

/// Admissible tested sets T with |T| <= max_size and PO(T) >= tau such that no
/// admissible proper subset also reaches tau. Candidates are unions of blocks
/// grown breadth-first by block count. Throws SearchBudgetExceeded when more
/// than `node_budget` candidate sets would be evaluated.
std::vector<std::vector<int>> minimal_significant_groups(const AnalysisContext& ctx, double rho, double tau,
                                                         int max_size,
                                                         std::size_t node_budget = kDefaultSearchBudget);

}  // namespace doublethink::ctp

#endif  // DOUBLETHINK_CTP_HPP
