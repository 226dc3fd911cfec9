#include "agl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace agl {

Basis default_basis() { return make_basis(0.0, 1.0, 6, 3); }

bool AdaptiveWeights::excluded(Eigen::Index j) const { return std::isinf(weights[static_cast<std::size_t>(j)]); }

AdaptiveWeights adaptive_weights(const Coefficients& step1) {
  AdaptiveWeights w;
  w.weights.resize(static_cast<std::size_t>(step1.num_groups()));
  for (Eigen::Index j = 0; j < step1.num_groups(); ++j) {
    const double norm = step1.group_norm(j);
    w.weights[static_cast<std::size_t>(j)] = norm > kZeroNorm ? 1.0 / norm : std::numeric_limits<double>::infinity();
  }
  return w;
}

bool ModelFit::is_selected(Eigen::Index j) const {
  return std::binary_search(selected.begin(), selected.end(), j);
}

PreparedProblem prepare(const Dataset& data, const Basis& basis) {
  data.validate();
  PreparedProblem prob;
  prob.basis = basis;
  auto [scaled, scale] = scale_covariates(data.x);
  prob.scale = std::move(scale);
  prob.centered = build_design(scaled, basis);
  auto [y, mu] = center_response(data.y);
  prob.y = std::move(y);
  prob.mu_hat = mu;
  prob.centered.y_mean = mu;
  prob.orthonormal = orthonormalize_groups(prob.centered);
  return prob;
}

ModelFit assemble_fit(const PreparedProblem& problem, const Design& solved_on, const Coefficients& beta,
                      double lambda1, double lambda2, const FitDiagnostics& step1, const FitDiagnostics& step2) {
  ModelFit fit;
  fit.mu_hat = problem.mu_hat;
  fit.lambda1 = lambda1;
  fit.lambda2 = lambda2;
  fit.step1 = step1;
  fit.step2 = step2;
  fit.basis = problem.basis;
  fit.scale = problem.scale;
  fit.col_means = problem.centered.col_means;

  const Eigen::Index m = solved_on.group_size;
  Coefficients kept = beta;
  fit.components.reserve(static_cast<std::size_t>(solved_on.num_groups()));
  for (Eigen::Index j = 0; j < solved_on.num_groups(); ++j) {
    ComponentEstimate c;
    c.index = j;
    if (beta.group_norm(j) > kZeroNorm) {
      c.coefficients = solved_on.transforms[static_cast<std::size_t>(j)] * beta.group(j);
      fit.selected.push_back(j);
    } else {
      c.coefficients = Eigen::VectorXd::Zero(m);
      kept.group(j).setZero();
    }
    c.norm = c.coefficients.norm();
    fit.components.push_back(std::move(c));
  }
  fit.rss = (problem.y - solved_on.z * kept.values).squaredNorm();
  fit.df = static_cast<double>(fit.selected.size()) * static_cast<double>(m);
  return fit;
}

TwoStepResult two_step_fit(const PreparedProblem& problem, double lambda1, double lambda2, const SolverOptions& opts) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "penalty levels must be nonnegative");
  }
  const Design& d = problem.orthonormal;
  auto s1 = solve_group_lasso(d, problem.y, Penalty::unit(d.num_groups(), lambda1), opts);
  AdaptiveWeights w = adaptive_weights(s1.coefficients);

  SolveResult<double> s2{Coefficients::zeros(d.num_groups(), d.group_size), {}};
  const bool any_kept = std::any_of(w.weights.begin(), w.weights.end(), [](double x) { return !std::isinf(x); });
  if (any_kept) {
    s2 = solve_group_lasso(d, problem.y, Penalty{lambda2, w.weights}, opts);
  } else {
    s2.diagnostics.converged = true;
    s2.diagnostics.objective_trace.push_back(problem.y.squaredNorm());
  }

  TwoStepResult out{assemble_fit(problem, d, s2.coefficients, lambda1, lambda2, s1.diagnostics, s2.diagnostics),
                    std::move(s1.coefficients), std::move(s2.coefficients), std::move(w)};
  return out;
}

ModelFit two_step_fit(const Dataset& data, const Basis& basis, double lambda1, double lambda2,
                      const SolverOptions& opts) {
  return two_step_fit(prepare(data, basis), lambda1, lambda2, opts).fit;
}

namespace {

double to_unit(const ModelFit& fit, Eigen::Index j, double value, OutOfRange policy) {
  constexpr double slack = 1e-12;
  double u = fit.scale.forward(j, value);
  if (u < -slack || u > 1.0 + slack) {
    if (policy == OutOfRange::reject) {
      throw Error(ErrorCode::out_of_domain,
                  "value " + std::to_string(value) + " lies outside the training range of covariate " +
                      std::to_string(j));
    }
  }
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace

Eigen::VectorXd predict_component(const ModelFit& fit, Eigen::Index j, const Eigen::VectorXd& x, OutOfRange policy) {
  if (j < 0 || j >= fit.num_covariates()) {
    throw Error(ErrorCode::invalid_argument, "component index " + std::to_string(j) + " out of range");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  const auto& coef = fit.components[static_cast<std::size_t>(j)].coefficients;
  const bool active = fit.is_selected(j);
  const Eigen::Index m = coef.size();
  const auto means = fit.col_means.row(j);
  const double shift = coef.dot(means.head(m).transpose());
  const int l = fit.basis.knots.degree();
  std::vector<double> local(static_cast<std::size_t>(l + 1));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u = to_unit(fit, j, x(i), policy);
    if (!active) continue;
    const int span = eval_basis_local(fit.basis.knots, u, local.data());
    double v = 0.0;
    for (int r = 0; r <= l; ++r) {
      const int k = span - l + r;
      if (k < m) v += coef(k) * local[static_cast<std::size_t>(r)];
    }
    out(i) = v - shift;
  }
  return out;
}

double predict(const ModelFit& fit, const Eigen::VectorXd& x_row, OutOfRange policy) {
  if (x_row.size() != fit.num_covariates()) {
    throw Error(ErrorCode::dimension_mismatch, "row length does not match the covariate count");
  }
  double v = fit.mu_hat;
  for (Eigen::Index j = 0; j < x_row.size(); ++j) {
    v += predict_component(fit, j, x_row.segment(j, 1), policy)(0);
  }
  return v;
}

Eigen::VectorXd predict(const ModelFit& fit, const Eigen::MatrixXd& x, OutOfRange policy) {
  if (x.cols() != fit.num_covariates()) {
    throw Error(ErrorCode::dimension_mismatch, "column count does not match the covariate count");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), fit.mu_hat);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out += predict_component(fit, j, x.col(j), policy);
  }
  return out;
}

}  // namespace agl
