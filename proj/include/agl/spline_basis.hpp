#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "agl/error.hpp"

namespace agl {

/// Clamped knot sequence for a B-spline space of a given degree on [lower, upper].
/// Boundary knots carry multiplicity degree + 1.
template <typename Scalar>
class KnotVector {
 public:
  /// Linear basis on [0, 1] without interior knots.
  KnotVector() : KnotVector(1, Scalar(0), Scalar(1), {}) {}

  KnotVector(int degree, Scalar lower, Scalar upper, std::vector<Scalar> interior)
      : degree_(degree), lower_(lower), upper_(upper), interior_(std::move(interior)) {
    if (!(lower_ < upper_)) {
      throw Error(ErrorCode::invalid_interval, "knot interval requires lower < upper");
    }
    if (degree_ < 1) {
      throw Error(ErrorCode::invalid_degree, "spline degree must be at least 1");
    }
    for (std::size_t i = 0; i < interior_.size(); ++i) {
      if (!(interior_[i] > lower_ && interior_[i] < upper_)) {
        throw Error(ErrorCode::invalid_argument, "interior knots must lie strictly inside the interval");
      }
      if (i > 0 && !(interior_[i] > interior_[i - 1])) {
        throw Error(ErrorCode::invalid_argument, "interior knots must be strictly increasing");
      }
    }
    full_.reserve(interior_.size() + 2 * static_cast<std::size_t>(degree_ + 1));
    full_.insert(full_.end(), static_cast<std::size_t>(degree_ + 1), lower_);
    full_.insert(full_.end(), interior_.begin(), interior_.end());
    full_.insert(full_.end(), static_cast<std::size_t>(degree_ + 1), upper_);
  }

  int degree() const noexcept { return degree_; }
  Scalar lower() const noexcept { return lower_; }
  Scalar upper() const noexcept { return upper_; }
  int num_interior() const noexcept { return static_cast<int>(interior_.size()); }
  const std::vector<Scalar>& interior() const noexcept { return interior_; }
  const std::vector<Scalar>& full_knots() const noexcept { return full_; }

  /// Number of B-spline functions, K + l + 1.
  int raw_dim() const noexcept { return num_interior() + degree_ + 1; }

 private:
  int degree_;
  Scalar lower_;
  Scalar upper_;
  std::vector<Scalar> interior_;
  std::vector<Scalar> full_;
};

/// Knot vector plus the derived basis dimensions. The centered basis drops
/// one function per covariate, so centered_dim = raw_dim - 1 = K + l.
template <typename Scalar>
struct BasisSpec {
  KnotVector<Scalar> knots;

  int raw_dim() const noexcept { return knots.raw_dim(); }
  int centered_dim() const noexcept { return knots.raw_dim() - 1; }
};

/// Evenly spaced interior knots t(b-a)/(K+1), t = 1..K, clamped at both ends.
template <typename Scalar>
KnotVector<Scalar> make_knots(Scalar a, Scalar b, int num_interior, int degree) {
  if (!(a < b)) {
    throw Error(ErrorCode::invalid_interval, "make_knots requires a < b");
  }
  if (degree < 1) {
    throw Error(ErrorCode::invalid_degree, "make_knots requires degree >= 1");
  }
  if (num_interior < 0) {
    throw Error(ErrorCode::invalid_argument, "make_knots requires a nonnegative knot count");
  }
  std::vector<Scalar> interior;
  interior.reserve(static_cast<std::size_t>(num_interior));
  for (int t = 1; t <= num_interior; ++t) {
    interior.push_back(a + Scalar(t) * (b - a) / Scalar(num_interior + 1));
  }
  return KnotVector<Scalar>(degree, a, b, std::move(interior));
}

template <typename Scalar>
BasisSpec<Scalar> make_basis(Scalar a, Scalar b, int num_interior, int degree) {
  return BasisSpec<Scalar>{make_knots(a, b, num_interior, degree)};
}

namespace detail {

/// Index s of the knot span [t_s, t_{s+1}) containing x, with the right
/// endpoint assigned to the last nonempty span.
template <typename Scalar>
int find_span(const KnotVector<Scalar>& knots, Scalar x) {
  const auto& t = knots.full_knots();
  const int l = knots.degree();
  const int last = knots.raw_dim() - 1;  // index of the last nonempty span
  if (x >= knots.upper()) return last;
  auto it = std::upper_bound(t.begin() + l, t.begin() + last + 1, x);
  return static_cast<int>(it - t.begin()) - 1;
}

}  // namespace detail

/// Writes the l+1 possibly nonzero basis values at x into `local`
/// (local[r] is function span - l + r) and returns the span index.
/// Cox-de Boor triangle, as in de Boor's BSPLVB.
template <typename Scalar>
int eval_basis_local(const KnotVector<Scalar>& knots, Scalar x, Scalar* local) {
  if (!(x >= knots.lower() && x <= knots.upper())) {
    throw Error(ErrorCode::out_of_domain, "spline evaluation point outside the knot interval");
  }
  const auto& t = knots.full_knots();
  const int l = knots.degree();
  const int span = detail::find_span(knots, x);

  Scalar left[32];
  Scalar right[32];
  std::vector<Scalar> heap_left, heap_right;
  Scalar* lp = left;
  Scalar* rp = right;
  if (l + 1 > 32) {
    heap_left.resize(static_cast<std::size_t>(l + 1));
    heap_right.resize(static_cast<std::size_t>(l + 1));
    lp = heap_left.data();
    rp = heap_right.data();
  }

  local[0] = Scalar(1);
  for (int j = 1; j <= l; ++j) {
    lp[j] = x - t[static_cast<std::size_t>(span + 1 - j)];
    rp[j] = t[static_cast<std::size_t>(span + j)] - x;
    Scalar saved = Scalar(0);
    for (int r = 0; r < j; ++r) {
      const Scalar temp = local[r] / (rp[r + 1] + lp[j - r]);
      local[r] = saved + rp[r + 1] * temp;
      saved = lp[j - r] * temp;
    }
    local[j] = saved;
  }
  return span;
}

/// All K + l + 1 normalized B-spline values at x; at most l + 1 are nonzero.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_basis(const KnotVector<Scalar>& knots, Scalar x) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(knots.raw_dim());
  std::vector<Scalar> local(static_cast<std::size_t>(knots.degree() + 1));
  const int span = eval_basis_local(knots, x, local.data());
  for (int r = 0; r <= knots.degree(); ++r) {
    out(span - knots.degree() + r) = local[static_cast<std::size_t>(r)];
  }
  return out;
}

/// Row i holds eval_basis(knots, x(i)).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_basis_matrix(
    const KnotVector<typename Derived::Scalar>& knots, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(x.size(), knots.raw_dim());
  std::vector<Scalar> local(static_cast<std::size_t>(knots.degree() + 1));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const int span = eval_basis_local(knots, x(i), local.data());
    for (int r = 0; r <= knots.degree(); ++r) {
      out(i, span - knots.degree() + r) = local[static_cast<std::size_t>(r)];
    }
  }
  return out;
}

}  // namespace agl
