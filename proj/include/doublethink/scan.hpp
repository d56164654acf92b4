#ifndef DOUBLETHINK_SCAN_HPP
#define DOUBLETHINK_SCAN_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "doublethink/inference.hpp"
#include "doublethink/linmodel.hpp"
#include "doublethink/model_id.hpp"

namespace doublethink {

/// Log maximized likelihood ratios and log posterior odds of every submodel,
/// indexed by the integer value of its ModelId, plus the model-averaged
/// coefficient estimates at the scan's hyperparameters.
class ExhaustiveScan {
 public:
  ExhaustiveScan(std::vector<std::string> names, inference::Hyperparams hyper, std::vector<double> log_mlr,
                 std::vector<double> log_po, std::vector<inference::CoefficientEstimate> estimates);

  int nu() const { return static_cast<int>(names_.size()); }
  std::size_t model_count() const { return log_po_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const inference::Hyperparams& hyper() const { return hyper_; }

  double log_mlr(ModelId s) const { return log_mlr_[s.bits()]; }
  double log_po(ModelId s) const { return log_po_[s.bits()]; }
  std::span<const double> log_mlr_values() const { return log_mlr_; }
  std::span<const double> log_po_values() const { return log_po_; }
  const std::vector<inference::CoefficientEstimate>& estimates() const { return estimates_; }

 private:
  std::vector<std::string> names_;
  inference::Hyperparams hyper_;
  std::vector<double> log_mlr_;
  std::vector<double> log_po_;
  std::vector<inference::CoefficientEstimate> estimates_;
};

inline constexpr int kDefaultMaxVariables = 25;

struct ScanOptions {
  int max_variables = kDefaultMaxVariables;
};

/// Fits all 2^nu submodels. Throws TooManyVariables above the cap.
ExhaustiveScan scan_all_models(const linmodel::Dataset& data, const inference::Hyperparams& hyper,
                               const ScanOptions& options = {});

/// Recomputes posterior odds from stored log MLRs under new hyperparameters.
/// Mixture estimates need the per-model fits and are left empty.
ExhaustiveScan rescore(const ExhaustiveScan& scan, const inference::Hyperparams& hyper);

}  // namespace doublethink

#endif  // DOUBLETHINK_SCAN_HPP
