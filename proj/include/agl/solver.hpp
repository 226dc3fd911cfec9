#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agl/design.hpp"
#include "agl/error.hpp"

namespace agl {

/// Penalty level and per-group weights. An infinite weight excludes the
/// group: it is held at zero and contributes 0 * inf = 0 to the objective.
template <typename Scalar>
struct PenaltySpec {
  Scalar lambda = Scalar(0);
  std::vector<Scalar> weights;

  static PenaltySpec unit(Eigen::Index num_groups, Scalar lambda) {
    return PenaltySpec{lambda, std::vector<Scalar>(static_cast<std::size_t>(num_groups), Scalar(1))};
  }

  bool excluded(Eigen::Index j) const { return std::isinf(weights[static_cast<std::size_t>(j)]); }
  Scalar weight(Eigen::Index j) const { return weights[static_cast<std::size_t>(j)]; }
};

/// Stacked coefficient vector split into equal-size contiguous groups.
template <typename Scalar>
struct GroupedCoefficients {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector values;
  Eigen::Index group_size = 1;

  static GroupedCoefficients zeros(Eigen::Index num_groups, Eigen::Index group_size) {
    return GroupedCoefficients{Vector::Zero(num_groups * group_size), group_size};
  }

  Eigen::Index num_groups() const noexcept { return values.size() / group_size; }
  auto group(Eigen::Index j) { return values.segment(j * group_size, group_size); }
  auto group(Eigen::Index j) const { return values.segment(j * group_size, group_size); }
  Scalar group_norm(Eigen::Index j) const { return group(j).norm(); }
};

struct SolverOptions {
  double tol_objective = 1e-8;
  double tol_kkt = 1e-6;
  int max_sweeps = 10000;
};

struct FitDiagnostics {
  int sweeps = 0;
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  bool converged = false;
};

template <typename Scalar>
struct SolveResult {
  GroupedCoefficients<Scalar> coefficients;
  FitDiagnostics diagnostics;
};

/// (1 - t / ||s||)_+ s. Ties at ||s|| == t go to zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> group_soft_threshold(const Eigen::MatrixBase<Derived>& s,
                                                                                typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = s.norm();
  if (norm <= t) return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(s.size());
  return (Scalar(1) - t / norm) * s;
}

namespace detail {

template <typename Scalar>
inline const Scalar kRoundUp = Scalar(1) + Scalar(16) * std::numeric_limits<Scalar>::epsilon();

template <typename Scalar>
void check_dimensions(const GroupedDesign<Scalar>& design, Eigen::Index y_size) {
  if (design.n() != y_size) {
    throw Error(ErrorCode::dimension_mismatch,
                "response length " + std::to_string(y_size) + " does not match design rows " +
                    std::to_string(design.n()));
  }
}

template <typename Scalar>
void check_penalty(const GroupedDesign<Scalar>& design, const PenaltySpec<Scalar>& penalty) {
  if (!(penalty.lambda >= Scalar(0))) throw Error(ErrorCode::invalid_argument, "lambda must be nonnegative");
  if (static_cast<Eigen::Index>(penalty.weights.size()) != design.num_groups()) {
    throw Error(ErrorCode::dimension_mismatch, "weight count does not match group count");
  }
  for (const Scalar w : penalty.weights) {
    if (!(w >= Scalar(0))) throw Error(ErrorCode::invalid_argument, "weights must be nonnegative");
  }
}

template <typename Scalar>
void check_coefficients(const GroupedDesign<Scalar>& design, const GroupedCoefficients<Scalar>& beta) {
  if (beta.values.size() != design.z.cols() || beta.group_size != design.group_size) {
    throw Error(ErrorCode::dimension_mismatch, "coefficient layout does not match the design");
  }
}

template <typename Scalar>
Scalar penalty_value(const GroupedCoefficients<Scalar>& beta, const PenaltySpec<Scalar>& penalty) {
  Scalar total = Scalar(0);
  for (Eigen::Index j = 0; j < beta.num_groups(); ++j) {
    const Scalar norm = beta.group_norm(j);
    if (penalty.excluded(j)) {
      if (norm != Scalar(0)) {
        throw Error(ErrorCode::contract_violation, "excluded group " + std::to_string(j) + " has nonzero coefficients");
      }
      continue;
    }
    total += penalty.weight(j) * norm;
  }
  return penalty.lambda * total;
}

/// Shared outer loop for cyclic coordinate descent. `Blocks` supplies the
/// per-block exact minimization, the penalty value and the KKT residual.
/// Runs full sweeps interleaved with sweeps over the current active set;
/// the objective-change stopping rule is tightened whenever the KKT
/// certificate rejects a candidate solution.
template <typename Scalar, typename Blocks>
FitDiagnostics coordinate_descent(Blocks& blocks, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& residual,
                                  const SolverOptions& opts) {
  FitDiagnostics diag;
  auto objective_now = [&] { return static_cast<double>(residual.squaredNorm() + blocks.penalty()); };
  diag.objective_trace.push_back(objective_now());

  double tol = opts.tol_objective;
  bool full = true;
  std::vector<char> active_before;
  while (diag.sweeps < opts.max_sweeps) {
    if (full) active_before = blocks.active_mask();
    const double prev = diag.objective_trace.back();
    blocks.sweep(residual, full);
    ++diag.sweeps;
    const double obj = objective_now();
    diag.objective_trace.push_back(obj);
    const double rel = (prev - obj) / std::max(std::abs(obj), std::numeric_limits<double>::min());

    if (rel >= tol) {
      full = false;
      continue;
    }
    if (!full) {
      full = true;  // active set settled; confirm with a sweep over everything
      continue;
    }
    if (blocks.active_mask() != active_before) continue;

    blocks.refresh_residual(residual);
    diag.kkt_residual = static_cast<double>(blocks.kkt(residual));
    if (diag.kkt_residual <= opts.tol_kkt) {
      diag.converged = true;
      return diag;
    }
    tol = std::max(tol * 1e-2, 1e-16);
  }
  blocks.refresh_residual(residual);
  diag.kkt_residual = static_cast<double>(blocks.kkt(residual));
  diag.converged = false;
  return diag;
}

/// Group blocks of an orthonormalized design: Z_j'Z_j = n I.
template <typename Scalar>
class OrthonormalGroupBlocks {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  OrthonormalGroupBlocks(const GroupedDesign<Scalar>& design, const Vector& y, const PenaltySpec<Scalar>& penalty,
                         GroupedCoefficients<Scalar>& beta)
      : design_(design), y_(y), penalty_(penalty), beta_(beta), n_(Scalar(design.n())) {}

  Scalar penalty() const { return penalty_value(beta_, penalty_); }

  std::vector<char> active_mask() const {
    std::vector<char> mask(static_cast<std::size_t>(beta_.num_groups()));
    for (Eigen::Index j = 0; j < beta_.num_groups(); ++j) mask[static_cast<std::size_t>(j)] = beta_.group_norm(j) > 0;
    return mask;
  }

  void sweep(Vector& r, bool full) {
    for (Eigen::Index j = 0; j < beta_.num_groups(); ++j) {
      if (penalty_.excluded(j)) continue;
      auto bj = beta_.group(j);
      if (!full && bj.squaredNorm() == Scalar(0)) continue;
      const auto zj = design_.block(j);
      Vector s = zj.transpose() * r / n_ + bj;
      Vector updated = group_soft_threshold(s, penalty_.lambda * penalty_.weight(j) / (Scalar(2) * n_));
      Vector delta = updated - bj;
      if (delta.squaredNorm() > Scalar(0)) {
        r.noalias() -= zj * delta;
        bj = updated;
      }
    }
  }

  void refresh_residual(Vector& r) const { r = y_ - design_.z * beta_.values; }

  Scalar kkt(const Vector& r) const;

 private:
  const GroupedDesign<Scalar>& design_;
  const Vector& y_;
  const PenaltySpec<Scalar>& penalty_;
  GroupedCoefficients<Scalar>& beta_;
  Scalar n_;
};

template <typename Scalar>
Scalar group_kkt_violation(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r,
                           const GroupedCoefficients<Scalar>& beta, const PenaltySpec<Scalar>& penalty) {
  Scalar worst = Scalar(0);
  for (Eigen::Index j = 0; j < design.num_groups(); ++j) {
    if (penalty.excluded(j)) continue;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad = Scalar(2) * (design.block(j).transpose() * r);
    const Scalar scale = penalty.lambda * penalty.weight(j);
    const auto bj = beta.group(j);
    const Scalar norm = bj.norm();
    Scalar v;
    if (norm > Scalar(0)) {
      v = (grad - scale * bj / norm).norm();
    } else {
      v = std::max(grad.norm() - scale, Scalar(0));
    }
    worst = std::max(worst, v);
  }
  return worst / (Scalar(1) + penalty.lambda);
}

template <typename Scalar>
Scalar OrthonormalGroupBlocks<Scalar>::kkt(const Vector& r) const {
  return group_kkt_violation(design_, r, beta_, penalty_);
}

/// Single coefficients with arbitrary column norms and an l1 penalty.
template <typename Scalar>
class ScalarCoordinates {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ScalarCoordinates(const GroupedDesign<Scalar>& design, const Vector& y, Scalar lambda, Vector& beta)
      : design_(design), y_(y), lambda_(lambda), beta_(beta), col_sq_(design.z.colwise().squaredNorm().transpose()) {}

  Scalar penalty() const { return lambda_ * beta_.template lpNorm<1>(); }

  std::vector<char> active_mask() const {
    std::vector<char> mask(static_cast<std::size_t>(beta_.size()));
    for (Eigen::Index k = 0; k < beta_.size(); ++k) mask[static_cast<std::size_t>(k)] = beta_(k) != Scalar(0);
    return mask;
  }

  void sweep(Vector& r, bool full) {
    const Scalar half = lambda_ / Scalar(2);
    for (Eigen::Index k = 0; k < beta_.size(); ++k) {
      if (col_sq_(k) == Scalar(0)) continue;
      if (!full && beta_(k) == Scalar(0)) continue;
      const auto zk = design_.z.col(k);
      const Scalar u = zk.dot(r) + col_sq_(k) * beta_(k);
      const Scalar mag = std::abs(u) - half;
      const Scalar updated = mag > Scalar(0) ? std::copysign(mag, u) / col_sq_(k) : Scalar(0);
      const Scalar delta = updated - beta_(k);
      if (delta != Scalar(0)) {
        r.noalias() -= delta * zk;
        beta_(k) = updated;
      }
    }
  }

  void refresh_residual(Vector& r) const { r = y_ - design_.z * beta_; }

  Scalar kkt(const Vector& r) const {
    const Vector grad = Scalar(2) * (design_.z.transpose() * r);
    Scalar worst = Scalar(0);
    for (Eigen::Index k = 0; k < beta_.size(); ++k) {
      Scalar v;
      if (beta_(k) != Scalar(0)) {
        v = std::abs(grad(k) - lambda_ * (beta_(k) > 0 ? Scalar(1) : Scalar(-1)));
      } else {
        v = std::max(std::abs(grad(k)) - lambda_, Scalar(0));
      }
      worst = std::max(worst, v);
    }
    return worst / (Scalar(1) + lambda_);
  }

 private:
  const GroupedDesign<Scalar>& design_;
  const Vector& y_;
  Scalar lambda_;
  Vector& beta_;
  Vector col_sq_;
};

}  // namespace detail

/// ||y - Z beta||^2 + lambda * sum_j w_j ||beta_j||, with 0 * inf = 0.
template <typename Scalar>
Scalar objective(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                 const GroupedCoefficients<Scalar>& beta, const PenaltySpec<Scalar>& penalty) {
  detail::check_dimensions(design, y.size());
  detail::check_penalty(design, penalty);
  detail::check_coefficients(design, beta);
  return (y - design.z * beta.values).squaredNorm() + detail::penalty_value(beta, penalty);
}

/// Smallest lambda for which beta = 0 satisfies the KKT conditions:
/// max over penalized groups of 2 ||Z_j'y|| / w_j, rounded up by a few ulps
/// so that solving at the returned value gives exact zeros.
template <typename Scalar>
Scalar lambda_max(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                  const std::vector<Scalar>& weights) {
  detail::check_dimensions(design, y.size());
  if (static_cast<Eigen::Index>(weights.size()) != design.num_groups()) {
    throw Error(ErrorCode::dimension_mismatch, "weight count does not match group count");
  }
  Scalar best = Scalar(0);
  bool any = false;
  for (Eigen::Index j = 0; j < design.num_groups(); ++j) {
    const Scalar w = weights[static_cast<std::size_t>(j)];
    if (std::isinf(w)) continue;
    any = true;
    const Scalar g = Scalar(2) * (design.block(j).transpose() * y).norm();
    if (w == Scalar(0)) {
      if (g > Scalar(0)) return std::numeric_limits<Scalar>::infinity();
      continue;
    }
    best = std::max(best, g / w);
  }
  if (!any) throw Error(ErrorCode::all_groups_excluded, "every group has infinite weight");
  return best * detail::kRoundUp<Scalar>;
}

/// Largest KKT violation over groups, divided by (1 + lambda). Zero at an
/// exact minimizer.
template <typename Scalar>
Scalar kkt_residual(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                    const GroupedCoefficients<Scalar>& beta, const PenaltySpec<Scalar>& penalty) {
  detail::check_dimensions(design, y.size());
  detail::check_penalty(design, penalty);
  detail::check_coefficients(design, beta);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = y - design.z * beta.values;
  return detail::group_kkt_violation(design, r, beta, penalty);
}

/// Weighted group Lasso by cyclic block coordinate descent. The design must
/// be group-orthonormalized (Z_j'Z_j = n I), which makes every block update
/// a closed-form group soft-threshold at lambda w_j / (2n).
template <typename Scalar>
SolveResult<Scalar> solve_group_lasso(const GroupedDesign<Scalar>& design,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                                      const PenaltySpec<Scalar>& penalty, const SolverOptions& opts = {},
                                      const std::optional<GroupedCoefficients<Scalar>>& warm_start = std::nullopt) {
  detail::check_dimensions(design, y.size());
  detail::check_penalty(design, penalty);

  GroupedCoefficients<Scalar> beta = GroupedCoefficients<Scalar>::zeros(design.num_groups(), design.group_size);
  if (warm_start) {
    detail::check_coefficients(design, *warm_start);
    beta = *warm_start;
  }
  for (Eigen::Index j = 0; j < design.num_groups(); ++j) {
    if (penalty.excluded(j)) beta.group(j).setZero();
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = y - design.z * beta.values;
  detail::OrthonormalGroupBlocks<Scalar> blocks(design, y, penalty, beta);
  FitDiagnostics diag = detail::coordinate_descent<Scalar>(blocks, r, opts);
  return {std::move(beta), std::move(diag)};
}

/// max_k 2 |z_k'y|: the l1 penalty level at which beta = 0 is optimal.
template <typename Scalar>
Scalar ordinary_lambda_max(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  detail::check_dimensions(design, y.size());
  if (design.z.cols() == 0) return Scalar(0);
  return Scalar(2) * (design.z.transpose() * y).cwiseAbs().maxCoeff() * detail::kRoundUp<Scalar>;
}

/// ||y - Z beta||^2 + lambda sum_k |beta_k| by coordinate descent on single
/// columns. Works for any column norms; grouping only affects reporting.
template <typename Scalar>
SolveResult<Scalar> solve_ordinary_lasso(const GroupedDesign<Scalar>& design,
                                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y, Scalar lambda,
                                         const SolverOptions& opts = {},
                                         const std::optional<GroupedCoefficients<Scalar>>& warm_start = std::nullopt) {
  detail::check_dimensions(design, y.size());
  if (!(lambda >= Scalar(0))) throw Error(ErrorCode::invalid_argument, "lambda must be nonnegative");

  GroupedCoefficients<Scalar> beta = GroupedCoefficients<Scalar>::zeros(design.num_groups(), design.group_size);
  if (warm_start) {
    detail::check_coefficients(design, *warm_start);
    beta = *warm_start;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = y - design.z * beta.values;
  detail::ScalarCoordinates<Scalar> coords(design, y, lambda, beta.values);
  FitDiagnostics diag = detail::coordinate_descent<Scalar>(coords, r, opts);
  return {std::move(beta), std::move(diag)};
}

/// KKT residual for the l1 problem, normalized like kkt_residual.
template <typename Scalar>
Scalar ordinary_kkt_residual(const GroupedDesign<Scalar>& design, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                             const GroupedCoefficients<Scalar>& beta, Scalar lambda) {
  detail::check_dimensions(design, y.size());
  detail::check_coefficients(design, beta);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values = beta.values;
  detail::ScalarCoordinates<Scalar> coords(design, y, lambda, values);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = y - design.z * beta.values;
  return coords.kkt(r);
}

}  // namespace agl
