#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "agl/error.hpp"
#include "agl/spline_basis.hpp"

namespace agl {

/// Response vector y (length n) and covariate matrix x (n x p).
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::vector<std::string> names;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return x.cols(); }

  /// Label for covariate j; falls back to "x<j+1>" when unnamed.
  std::string name(Eigen::Index j) const;

  /// Throws on n < 2, shape mismatch, non-finite entries or constant columns.
  void validate() const;

  /// Rows selected by index, keeping names.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Per-column affine map onto [0, 1]: (x - min) / range.
template <typename Scalar>
struct ScaleInfo {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector min;
  Vector range;

  Scalar forward(Eigen::Index j, Scalar value) const { return (value - min(j)) / range(j); }
  Scalar inverse(Eigen::Index j, Scalar unit) const { return min(j) + unit * range(j); }

  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.rowwise() - min.transpose()).array().rowwise() / range.transpose().array()).matrix();
  }

  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> invert(const Eigen::MatrixBase<Derived>& u) const {
    return ((u.array().rowwise() * range.transpose().array()).matrix().rowwise() + min.transpose());
  }
};

template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>, ScaleInfo<typename Derived::Scalar>>
scale_covariates(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  ScaleInfo<Scalar> info;
  info.min = x.colwise().minCoeff().transpose();
  info.range = x.colwise().maxCoeff().transpose() - info.min;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (!(info.range(j) > Scalar(0))) {
      throw Error(ErrorCode::constant_column, "covariate column " + std::to_string(j) + " is constant");
    }
  }
  auto scaled = info.apply(x);
  // Pin the extremes so floating-point rounding cannot push them outside [0, 1].
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
      scaled(i, j) = std::clamp(scaled(i, j), Scalar(0), Scalar(1));
    }
  }
  return {std::move(scaled), std::move(info)};
}

template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>, typename Derived::Scalar> center_response(
    const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = y.size() > 0 ? y.mean() : Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> centered = y.array() - mu;
  return {std::move(centered), mu};
}

/// Block design of p contiguous groups of `group_size` columns each.
///
/// `col_means(j, k)` is the sample mean of raw B-spline k on covariate j
/// (all K + l + 1 of them, the last one being the dropped column).
/// `transforms[j]` maps coefficients in the coordinates of `z` back to
/// coefficients of the centered basis psi_1..psi_m: beta_psi = T_j * beta_z.
template <typename Scalar>
struct GroupedDesign {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix z;
  Eigen::Index group_size = 0;
  Matrix col_means;
  std::vector<Matrix> transforms;
  std::vector<Eigen::Index> ranks;
  Scalar y_mean = Scalar(0);

  Eigen::Index n() const noexcept { return z.rows(); }
  Eigen::Index num_groups() const noexcept { return group_size > 0 ? z.cols() / group_size : 0; }

  auto block(Eigen::Index j) const { return z.middleCols(j * group_size, group_size); }

  /// Wraps an arbitrary matrix as a grouped design with identity transforms.
  static GroupedDesign from_matrix(Matrix m, Eigen::Index group_size) {
    if (group_size <= 0 || m.cols() % group_size != 0) {
      throw Error(ErrorCode::dimension_mismatch, "column count is not a multiple of the group size");
    }
    GroupedDesign d;
    d.z = std::move(m);
    d.group_size = group_size;
    d.transforms.assign(static_cast<std::size_t>(d.num_groups()), Matrix::Identity(group_size, group_size));
    d.ranks.assign(static_cast<std::size_t>(d.num_groups()), group_size);
    return d;
  }
};

/// Relative ridge used as the numerical-rank threshold for a group Gram matrix.
inline constexpr double kRidgeEpsilon = 1e-10;

/// Evaluates the raw basis at every covariate value, subtracts column means
/// and drops the last centered column of each group (it is minus the sum of
/// the others, since the raw basis sums to one).
template <typename Derived>
GroupedDesign<typename Derived::Scalar> build_design(const Eigen::MatrixBase<Derived>& scaled_x,
                                                     const BasisSpec<typename Derived::Scalar>& spec) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename GroupedDesign<Scalar>::Matrix;
  const Eigen::Index n = scaled_x.rows();
  const Eigen::Index p = scaled_x.cols();
  const Eigen::Index raw = spec.raw_dim();
  const Eigen::Index m = spec.centered_dim();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "design needs at least one observation");
  if (m < 1) throw Error(ErrorCode::invalid_argument, "basis must have at least two functions");

  GroupedDesign<Scalar> d;
  d.z.resize(n, p * m);
  d.group_size = m;
  d.col_means.resize(p, raw);
  for (Eigen::Index j = 0; j < p; ++j) {
    Matrix phi = eval_basis_matrix(spec.knots, scaled_x.col(j));
    const auto means = phi.colwise().mean();
    d.col_means.row(j) = means;
    d.z.middleCols(j * m, m) = phi.leftCols(m).rowwise() - means.leftCols(m);
    const Matrix gram = d.z.middleCols(j * m, m).transpose() * d.z.middleCols(j * m, m);
    if (!(gram.trace() > Scalar(0))) {
      throw Error(ErrorCode::rank_deficient, "centered basis block for covariate " + std::to_string(j) + " is zero");
    }
  }
  d.transforms.assign(static_cast<std::size_t>(p), Matrix::Identity(m, m));
  d.ranks.assign(static_cast<std::size_t>(p), m);
  return d;
}

namespace detail {

/// Transform T with (ZT)'(ZT)/n equal to the identity on the numerical range
/// of Z. Full-rank blocks use the inverse transposed Cholesky factor, which is
/// unique and the identity for an already orthonormal block; rank-deficient
/// blocks fall back to an eigen-decomposition with null directions zeroed.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, Eigen::Index> orthonormalizing_transform(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& gram) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = gram.rows();
  const Scalar ridge = Scalar(kRidgeEpsilon) * gram.trace() / Scalar(m);

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success) {
    const Matrix l = llt.matrixL();
    if (l.diagonal().array().square().minCoeff() > ridge) {
      Matrix t = l.transpose().template triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
      return {std::move(t), m};
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  Matrix t = Matrix::Zero(m, m);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Scalar ev = eig.eigenvalues()(k);
    if (ev > ridge) {
      t.col(k) = eig.eigenvectors().col(k) / std::sqrt(ev);
      ++rank;
    }
  }
  return {std::move(t), rank};
}

}  // namespace detail

/// Replaces each block Z_j by Z_j T_j with Z_j' Z_j / n = I (on its numerical
/// range), composing T_j into the stored back-transforms.
template <typename Scalar>
GroupedDesign<Scalar> orthonormalize_groups(const GroupedDesign<Scalar>& design) {
  using Matrix = typename GroupedDesign<Scalar>::Matrix;
  GroupedDesign<Scalar> out = design;
  const Eigen::Index m = design.group_size;
  const Scalar n = Scalar(design.n());
  for (Eigen::Index j = 0; j < design.num_groups(); ++j) {
    const auto blk = design.block(j);
    const Matrix gram = (blk.transpose() * blk) / n;
    auto [t, rank] = detail::orthonormalizing_transform<Scalar>(gram);
    if (rank == 0) {
      throw Error(ErrorCode::rank_deficient, "group " + std::to_string(j) + " has numerical rank zero");
    }
    out.z.middleCols(j * m, m) = blk * t;
    out.transforms[static_cast<std::size_t>(j)] = design.transforms[static_cast<std::size_t>(j)] * t;
    out.ranks[static_cast<std::size_t>(j)] = rank;
  }
  return out;
}

}  // namespace agl
