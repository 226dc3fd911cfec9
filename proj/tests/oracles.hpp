#pragma once

// Test-only reference computations. None of these call into the solver,
// design or pipeline code they are used to check.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Least squares via the normal equations in extended precision.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  const LMatrix zl = z.cast<long double>();
  const LVector yl = y.cast<long double>();
  const LMatrix gram = zl.transpose() * zl;
  const LVector rhs = zl.transpose() * yl;
  return gram.ldlt().solve(rhs).cast<double>();
}

/// ||y - Z b||^2 + lambda sum_j w_j ||b_j|| by an explicit double loop.
inline long double objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& b,
                             Eigen::Index m, long double lambda, const std::vector<double>& w) {
  long double rss = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    long double fit = 0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) fit += static_cast<long double>(z(i, k)) * b(k);
    const long double r = y(i) - fit;
    rss += r * r;
  }
  long double pen = 0;
  for (Eigen::Index j = 0; j < z.cols() / m; ++j) {
    long double sq = 0;
    for (Eigen::Index k = 0; k < m; ++k) sq += static_cast<long double>(b(j * m + k)) * b(j * m + k);
    if (sq > 0) pen += w[static_cast<std::size_t>(j)] * std::sqrt(sq);
  }
  return rss + lambda * pen;
}

/// Weighted group Lasso by accelerated proximal gradient (FISTA with
/// adaptive restart) on the full problem in long double. Uses the full
/// Gram matrix and a global step; no block structure of Z is assumed.
inline Eigen::VectorXd group_lasso(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, Eigen::Index m,
                                   long double lambda, const std::vector<double>& w, int iterations = 200000) {
  const LMatrix zl = z.cast<long double>();
  const LVector yl = y.cast<long double>();
  const LMatrix gram = 2 * zl.transpose() * zl;
  const LVector zty = 2 * zl.transpose() * yl;
  // Lipschitz constant of the gradient: largest eigenvalue of 2 Z'Z.
  Eigen::SelfAdjointEigenSolver<LMatrix> eig(gram);
  const long double lip = eig.eigenvalues().maxCoeff() * 1.000001L;
  const Eigen::Index p = z.cols() / m;

  auto prox = [&](const LVector& v) {
    LVector out = v;
    for (Eigen::Index j = 0; j < p; ++j) {
      const long double wj = w[static_cast<std::size_t>(j)];
      if (std::isinf(wj)) {
        out.segment(j * m, m).setZero();
        continue;
      }
      const long double t = lambda * wj / lip;
      const long double nrm = v.segment(j * m, m).norm();
      out.segment(j * m, m) = nrm <= t ? LVector::Zero(m) : LVector((1 - t / nrm) * v.segment(j * m, m));
    }
    return out;
  };
  auto f = [&](const LVector& b) {
    const LVector r = yl - zl * b;
    long double pen = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const long double nrm = b.segment(j * m, m).norm();
      if (nrm > 0) pen += w[static_cast<std::size_t>(j)] * nrm;
    }
    return r.squaredNorm() + lambda * pen;
  };

  LVector x = LVector::Zero(z.cols());
  LVector yk = x;
  long double tk = 1;
  long double fx = f(x);
  for (int it = 0; it < iterations; ++it) {
    const LVector grad = gram * yk - zty;
    const LVector xn = prox(yk - grad / lip);
    const long double fn = f(xn);
    if (fn > fx) {  // restart momentum
      yk = x;
      tk = 1;
      continue;
    }
    const long double tn = (1 + std::sqrt(1 + 4 * tk * tk)) / 2;
    yk = xn + ((tk - 1) / tn) * (xn - x);
    const bool stalled = (x - xn).norm() <= 1e-30L * (1 + xn.norm());
    x = xn;
    fx = fn;
    tk = tn;
    if (stalled) break;
  }
  return x.cast<double>();
}

/// Random n x (p m) matrix with i.i.d. standard normal entries.
inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng).col(0);
}

/// Thin QR per block scaled so each block has Z_j'Z_j = n I.
inline Eigen::MatrixXd orthonormal_blocks(const Eigen::MatrixXd& x, Eigen::Index m) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  const double scale = std::sqrt(static_cast<double>(x.rows()));
  for (Eigen::Index j = 0; j < x.cols() / m; ++j) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x.middleCols(j * m, m));
    out.middleCols(j * m, m) = scale * (qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), m));
  }
  return out;
}

}  // namespace oracle
