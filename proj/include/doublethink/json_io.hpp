#ifndef DOUBLETHINK_JSON_IO_HPP
#define DOUBLETHINK_JSON_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "doublethink/ctp.hpp"
#include "doublethink/inference.hpp"
#include "doublethink/simlab.hpp"
#include "doublethink/xcrit.hpp"

namespace doublethink {

using Json = nlohmann::json;

/// Finite doubles pass through (shortest round-trip form); others become null.
Json number(double x);

Json to_json(const inference::Hyperparams& hyper);
Json to_json(const inference::TestReport& report);
Json to_json(const inference::CoefficientEstimate& est, const std::vector<std::string>& names);
Json to_json(const ctp::GroupingPolicy& policy, const std::vector<std::string>& names);
Json to_json(const simlab::Estimate& est);
Json to_json(const simlab::TwoVarReport& report);
Json to_json(const simlab::PriorSimReport& report);
Json to_json(const ctp::XcritResult& result);

/// Names of the listed variable indices.
Json names_of(const std::vector<int>& indices, const std::vector<std::string>& names);

}  // namespace doublethink

#endif  // DOUBLETHINK_JSON_IO_HPP
