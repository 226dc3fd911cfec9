#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "agl/selection.hpp"
#include "agl/simgen.hpp"

namespace agl {

struct StepReport {
  double lambda = 0.0;
  double bic = 0.0;
  double ebic = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
  bool converged = false;

  bool operator==(const StepReport&) const = default;
};

struct ComponentReport {
  Eigen::Index index = 0;  // column position in the input file's covariates
  std::string name;
  bool selected = false;
  std::vector<double> coefficients;
  double norm = 0.0;
  std::vector<double> grid_x;  // 100 points over the covariate's training range
  std::vector<double> grid_f;

  bool operator==(const ComponentReport&) const = default;
};

/// Everything `agl fit` writes.
struct FitReport {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  int degree = 3;
  int knots = 6;
  std::string criterion = "bic";
  double nu = 0.5;
  double mu_hat = 0.0;
  double rss = 0.0;
  double df = 0.0;
  StepReport step1;
  StepReport step2;
  std::vector<Eigen::Index> selected;
  std::vector<std::string> selected_names;
  std::vector<std::string> excluded_constant;
  std::vector<Eigen::Index> screened;  // empty when no screening was applied
  std::vector<ComponentReport> components;

  bool operator==(const FitReport&) const = default;
};

inline constexpr int kCurveGridSize = 100;

/// `columns[j]` is the input-file covariate position of fit column j.
FitReport make_fit_report(const TunedFit& tuned, const Dataset& data, const TuningConfig& config,
                          const std::vector<Eigen::Index>& columns);

nlohmann::json to_json(const FitReport& r);
FitReport fit_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SummaryTable& t);
nlohmann::json to_json(const CvResult& r);
nlohmann::json to_json(const std::vector<CriterionValue>& path);

/// Fixed-width summary table:
/// one row per method, NV / ME / IN / CS with the spread in parentheses.
std::string format_summary(const SummaryTable& t);

}  // namespace agl
