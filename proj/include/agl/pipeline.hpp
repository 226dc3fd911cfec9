#pragma once

#include <Eigen/Core>

#include <vector>

#include "agl/design.hpp"
#include "agl/solver.hpp"
#include "agl/spline_basis.hpp"

namespace agl {

using Basis = BasisSpec<double>;
using Design = GroupedDesign<double>;
using Coefficients = GroupedCoefficients<double>;
using Penalty = PenaltySpec<double>;
using Scaling = ScaleInfo<double>;

/// Group norms at or below this count as zero when forming selection sets
/// and adaptive weights.
inline constexpr double kZeroNorm = 1e-10;

/// Cubic splines with six interior knots on [0, 1].
Basis default_basis();

struct AdaptiveWeights {
  std::vector<double> weights;

  bool excluded(Eigen::Index j) const;
};

/// 1 / ||beta_j|| for groups kept by the first step, +inf for dropped ones.
AdaptiveWeights adaptive_weights(const Coefficients& step1);

struct ComponentEstimate {
  Eigen::Index index = 0;
  Eigen::VectorXd coefficients;  // in the centered basis psi_1..psi_m
  double norm = 0.0;
};

/// Estimated additive model plus everything needed to evaluate it on new
/// covariate values.
struct ModelFit {
  double mu_hat = 0.0;
  std::vector<ComponentEstimate> components;
  std::vector<Eigen::Index> selected;
  double rss = 0.0;
  double df = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  FitDiagnostics step1;
  FitDiagnostics step2;

  Basis basis;
  Scaling scale;
  Eigen::MatrixXd col_means;  // p x (K + l + 1) raw basis means

  Eigen::Index num_covariates() const noexcept { return static_cast<Eigen::Index>(components.size()); }
  bool is_selected(Eigen::Index j) const;
};

/// Data after scaling, basis expansion and centering. `centered` holds the
/// psi-coordinate design; `orthonormal` the group-orthonormalized one the
/// group Lasso solver runs on.
struct PreparedProblem {
  Basis basis;
  Scaling scale;
  Design centered;
  Design orthonormal;
  Eigen::VectorXd y;
  double mu_hat = 0.0;
};

PreparedProblem prepare(const Dataset& data, const Basis& basis);

/// Builds a ModelFit from coefficients expressed in the coordinates of
/// `solved_on` (either design of `problem`).
ModelFit assemble_fit(const PreparedProblem& problem, const Design& solved_on, const Coefficients& beta,
                      double lambda1, double lambda2, const FitDiagnostics& step1, const FitDiagnostics& step2);

struct TwoStepResult {
  ModelFit fit;                // adaptive group Lasso
  Coefficients step1;          // group Lasso, orthonormal coordinates
  Coefficients step2;          // adaptive group Lasso, orthonormal coordinates
  AdaptiveWeights weights;
};

TwoStepResult two_step_fit(const PreparedProblem& problem, double lambda1, double lambda2,
                           const SolverOptions& opts = {});

ModelFit two_step_fit(const Dataset& data, const Basis& basis, double lambda1, double lambda2,
                      const SolverOptions& opts = {});

enum class OutOfRange { reject, clamp };

/// f_j evaluated at covariate values given on the original scale.
Eigen::VectorXd predict_component(const ModelFit& fit, Eigen::Index j, const Eigen::VectorXd& x,
                                  OutOfRange policy = OutOfRange::reject);

/// mu_hat + sum_j f_j(x_j) for one row.
double predict(const ModelFit& fit, const Eigen::VectorXd& x_row, OutOfRange policy = OutOfRange::reject);

/// predict() for each row of x.
Eigen::VectorXd predict(const ModelFit& fit, const Eigen::MatrixXd& x, OutOfRange policy = OutOfRange::reject);

}  // namespace agl
