#include "agl/design.hpp"

#include <cmath>

namespace agl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_interval: return "invalid-interval";
    case ErrorCode::invalid_degree: return "invalid-degree";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::out_of_domain: return "out-of-domain";
    case ErrorCode::constant_column: return "constant-column";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::contract_violation: return "contract-violation";
    case ErrorCode::all_groups_excluded: return "all-groups-excluded";
    case ErrorCode::nonpositive_rss: return "nonpositive-rss";
    case ErrorCode::fold_too_small: return "fold-too-small";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::missing_value: return "missing-value";
    case ErrorCode::missing_column: return "missing-column";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

std::string Dataset::name(Eigen::Index j) const {
  if (j >= 0 && static_cast<std::size_t>(j) < names.size()) return names[static_cast<std::size_t>(j)];
  return "x" + std::to_string(j + 1);
}

void Dataset::validate() const {
  if (n() < 2) throw Error(ErrorCode::invalid_argument, "dataset needs at least two observations");
  if (x.rows() != n()) throw Error(ErrorCode::dimension_mismatch, "covariate rows do not match response length");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != p()) {
    throw Error(ErrorCode::dimension_mismatch, "name count does not match covariate count");
  }
  if (!y.allFinite()) throw Error(ErrorCode::missing_value, "response contains non-finite values");
  for (Eigen::Index j = 0; j < p(); ++j) {
    if (!x.col(j).allFinite()) {
      throw Error(ErrorCode::missing_value, "covariate " + name(j) + " contains non-finite values");
    }
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) {
      throw Error(ErrorCode::constant_column, "covariate " + name(j) + " is constant");
    }
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.names = names;
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.x.resize(static_cast<Eigen::Index>(rows.size()), p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  return out;
}

}  // namespace agl
