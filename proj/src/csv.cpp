#include "doublethink/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "doublethink/errors.hpp"

namespace doublethink {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

linmodel::Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (header.empty()) {
      for (auto c : cells) {
        if (c.empty()) throw Error(ErrorCode::ParseError, where(line_no) + "empty column name in header");
        header.emplace_back(c);
      }
      continue;
    }
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, where(line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto c = cells[k];
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row[k]);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(row[k]))
        throw Error(ErrorCode::ParseError, where(line_no) + "column '" + header[k] + "' is not a finite number: '" +
                                               std::string(c) + "'");
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "missing header row");
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
  {
    auto sorted = header;
    std::sort(sorted.begin(), sorted.end());
    if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end())
      throw Error(ErrorCode::ParseError, "duplicate column name '" + *dup + "'");
  }

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::ParseError, "no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t outcome = options.outcome.empty() ? 0 : column_of(options.outcome);
  std::vector<std::size_t> nuisance;
  for (const auto& name : options.nuisance) {
    const auto k = column_of(name);
    if (k == outcome) throw Error(ErrorCode::ParseError, "outcome column cannot be a nuisance column");
    if (std::find(nuisance.begin(), nuisance.end(), k) != nuisance.end())
      throw Error(ErrorCode::ParseError, "nuisance column '" + name + "' listed twice");
    nuisance.push_back(k);
  }
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < header.size(); ++k)
    if (k != outcome && std::find(nuisance.begin(), nuisance.end(), k) == nuisance.end()) candidates.push_back(k);

  const auto n = static_cast<Eigen::Index>(rows.size());
  linmodel::Dataset data;
  data.y.resize(n);
  data.X.resize(n, static_cast<Eigen::Index>(candidates.size()));
  data.nuisance.intercept = options.intercept;
  data.nuisance.variance = options.variance;
  data.nuisance.extra_columns.resize(n, static_cast<Eigen::Index>(nuisance.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y(i) = rows[i][outcome];
    for (std::size_t m = 0; m < candidates.size(); ++m) data.X(i, static_cast<Eigen::Index>(m)) = rows[i][candidates[m]];
    for (std::size_t m = 0; m < nuisance.size(); ++m)
      data.nuisance.extra_columns(i, static_cast<Eigen::Index>(m)) = rows[i][nuisance[m]];
  }
  for (auto k : candidates) data.names.push_back(header[k]);
  return data;
}

linmodel::VarianceMode parse_variance_mode(std::string_view text) {
  if (text == "profile") return linmodel::ProfiledVariance{};
  if (text.substr(0, 6) == "known:") {
    const auto v = text.substr(6);
    double sigma2 = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), sigma2);
    if (ec == std::errc() && ptr == v.data() + v.size() && sigma2 > 0.0 && std::isfinite(sigma2))
      return linmodel::KnownVariance{sigma2};
  }
  throw Error(ErrorCode::InvalidArgument, "variance must be 'profile' or 'known:<positive sigma^2>'");
}

linmodel::Dataset read_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

}  // namespace doublethink
