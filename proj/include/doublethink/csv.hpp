#ifndef DOUBLETHINK_CSV_HPP
#define DOUBLETHINK_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

#include "doublethink/linmodel.hpp"

namespace doublethink {

struct CsvOptions {
  std::string outcome;                 // column name; empty means the first column
  std::vector<std::string> nuisance;   // columns fit in every model
  bool intercept = false;
  linmodel::VarianceMode variance = linmodel::ProfiledVariance{};
};

/// Comma-separated table with a header row, numeric cells only (decimal
/// point, optional surrounding whitespace or double quotes). Blank lines are
/// skipped. Throws ParseError with the offending line number.
linmodel::Dataset parse_csv(std::string_view text, const CsvOptions& options);

/// "profile" or "known:<sigma2>".
linmodel::VarianceMode parse_variance_mode(std::string_view text);

linmodel::Dataset read_csv_file(const std::string& path, const CsvOptions& options);

}  // namespace doublethink

#endif  // DOUBLETHINK_CSV_HPP
