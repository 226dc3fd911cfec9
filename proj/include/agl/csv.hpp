#pragma once

#include <string>
#include <vector>

#include "agl/design.hpp"

namespace agl {

struct CsvLoad {
  Dataset dataset;
  /// Covariate columns dropped because every value was identical.
  std::vector<std::string> excluded_constant;
  /// For each kept covariate, its position among the file's covariate
  /// columns (response excluded).
  std::vector<Eigen::Index> columns;
};

/// Reads a header-row CSV. `response_column` names y; every other column is
/// a numeric covariate. Data rows are numbered from 1 in error messages.
CsvLoad load_csv(const std::string& path, const std::string& response_column);

/// Same as load_csv but from an in-memory document.
CsvLoad parse_csv(const std::string& text, const std::string& response_column);

/// Writes y as the first column (named `response_name`) followed by x.
void write_csv(const Dataset& data, const std::string& path, const std::string& response_name = "y");

}  // namespace agl
