#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "agl/pipeline.hpp"

namespace agl {

enum class Criterion { bic, ebic };

const char* to_string(Criterion c) noexcept;
Criterion parse_criterion(const std::string& text);

/// log(rss) + df log(n) / n
double bic(double rss, double df, Eigen::Index n);

/// bic + nu df log(p) / n
double ebic(double rss, double df, Eigen::Index n, Eigen::Index p, double nu = 0.5);

struct LambdaGrid {
  std::vector<double> values;
  double ratio = 0.0;
  int count = 0;
};

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
LambdaGrid make_grid(double lambda_max, int count, double ratio);

struct CriterionValue {
  double lambda = 0.0;
  double bic = 0.0;
  double ebic = 0.0;
  double df = 0.0;
  double rss = 0.0;
  Eigen::Index num_selected = 0;
  /// rss == 0: both criteria are -inf and the point is never selected.
  bool degenerate = false;

  double value(Criterion c) const { return c == Criterion::bic ? bic : ebic; }
};

/// Criterion values for a fit with `num_selected` nonzero groups of size m.
CriterionValue evaluate_criteria(double lambda, double rss, Eigen::Index num_selected, Eigen::Index group_size,
                                 Eigen::Index n, Eigen::Index p, double nu);

struct PathPoint {
  Coefficients coefficients;
  CriterionValue criterion;
  FitDiagnostics diagnostics;
};

/// Weighted group Lasso solved along a decreasing grid with warm starts.
std::vector<PathPoint> fit_path(const Design& design, const Eigen::VectorXd& y, const std::vector<double>& weights,
                                const LambdaGrid& grid, const SolverOptions& opts = {}, double nu = 0.5);

/// Ordinary (coordinatewise) Lasso along a decreasing grid with warm starts.
/// A group counts as selected when any of its coefficients is nonzero.
std::vector<PathPoint> fit_ordinary_path(const Design& design, const Eigen::VectorXd& y, const LambdaGrid& grid,
                                         const SolverOptions& opts = {}, double nu = 0.5);

/// Index of the non-degenerate point minimizing the criterion. Ties go to the
/// earlier point, i.e. the larger lambda.
std::size_t select_lambda(const std::vector<CriterionValue>& path, Criterion criterion);
std::size_t select_lambda(const std::vector<PathPoint>& path, Criterion criterion);

struct TuningConfig {
  Basis basis = default_basis();
  Criterion criterion = Criterion::bic;
  double nu = 0.5;
  int grid_size = 100;
  double grid_ratio = 1e-3;
  SolverOptions solver;
};

/// Group Lasso and adaptive group Lasso fits with penalties chosen by the
/// criterion: lambda1 over the first-step path, then lambda2 over a path
/// rebuilt from the weighted lambda_max of the second step.
struct TunedFit {
  ModelFit adaptive;
  ModelFit group;
  std::vector<CriterionValue> step1_path;
  std::vector<CriterionValue> step2_path;
  std::size_t step1_index = 0;
  std::size_t step2_index = 0;
  AdaptiveWeights weights;
};

TunedFit fit_tuned(const PreparedProblem& problem, const TuningConfig& config);
TunedFit fit_tuned(const Dataset& data, const TuningConfig& config);

struct ScreenEntry {
  Eigen::Index index = 0;
  double correlation = 0.0;
};

/// Pearson correlation of each column with y; 0 for a constant column.
Eigen::VectorXd marginal_correlations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Top `top_k` columns by |correlation|, descending, ties by column index.
std::vector<ScreenEntry> marginal_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index top_k);

/// Seeded random partition of 0..n-1 into k folds whose sizes differ by at most one.
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k, std::uint64_t seed);

struct CvResult {
  int folds = 0;
  std::vector<double> per_fold_pe;
  std::vector<Eigen::Index> per_fold_selected;
  std::vector<std::vector<Eigen::Index>> fold_indices;
  double mean_pe = 0.0;
  double mean_selected = 0.0;
};

/// k-fold prediction error of the tuned adaptive group Lasso. Each training
/// fold gets its own criterion-tuned penalties; held-out covariates outside
/// the training range are clamped to it.
CvResult kfold_cv(const Dataset& data, int k, const TuningConfig& config, std::uint64_t seed, unsigned threads = 1);

/// Repeats kfold_cv with seeds derived from `seed`.
std::vector<CvResult> repeated_cv(const Dataset& data, int k, const TuningConfig& config, std::uint64_t seed,
                                  int repetitions, unsigned threads = 0);

/// Mixes a master seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace agl
