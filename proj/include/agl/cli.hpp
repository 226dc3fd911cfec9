#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "agl/report.hpp"

namespace agl {

/// Options shared by every subcommand; each reads the fields it needs.
struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string response = "y";
  int degree = 3;
  int knots = 6;
  std::string criterion = "bic";
  double nu = 0.5;
  int grid_size = 100;
  double grid_ratio = 1e-3;
  long screen_top_k = 0;  // 0 disables screening
  int folds = 6;
  int reps = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;

  // simulate
  int example = 2;
  long n = 200;
  long p = 10;
  double t = 0.0;
  double sigma = 0.0;
  std::vector<std::string> methods{"AGL", "GL", "OLasso", "LinearLasso"};
  std::string data_out;

  /// Throws agl::Error when a numeric field is outside its documented range.
  void validate() const;
  TuningConfig tuning() const;
};

/// Result of a subcommand: the structured document (also written to
/// config.out when set) and a human-readable summary.
struct CommandOutput {
  nlohmann::json document;
  std::string summary;
};

FitReport cmd_fit(const RunConfig& config);
CommandOutput cmd_path(const RunConfig& config);
CommandOutput cmd_simulate(const RunConfig& config);
CommandOutput cmd_screen(const RunConfig& config);
CommandOutput cmd_cv(const RunConfig& config);

/// Dispatches on config.subcommand; fit output is wrapped like the others.
CommandOutput run_command(const RunConfig& config);

std::string format_fit(const FitReport& r);

void write_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace agl
