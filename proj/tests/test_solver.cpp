#include <doctest.h>

#include <limits>
#include <optional>
#include <random>

#include "agl/solver.hpp"
#include "oracles.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Instance {
  agl::GroupedDesign<double> design;
  Eigen::VectorXd y;
};

Instance random_instance(Eigen::Index n, Eigen::Index p, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd z = oracle::orthonormal_blocks(oracle::random_matrix(n, p * m, rng), m);
  Eigen::VectorXd y = oracle::random_vector(n, rng);
  y.array() -= y.mean();
  return {agl::GroupedDesign<double>::from_matrix(std::move(z), m), std::move(y)};
}

std::vector<double> unit_weights(Eigen::Index p) { return std::vector<double>(static_cast<std::size_t>(p), 1.0); }

}  // namespace

TEST_CASE("group_soft_threshold") {
  Eigen::Vector2d s(3, 4);
  CHECK(agl::group_soft_threshold(s, 5.0).isZero(0));
  CHECK(agl::group_soft_threshold(s, 0.0) == s);
  const Eigen::VectorXd half = agl::group_soft_threshold(s, 2.5);
  CHECK(half(0) == doctest::Approx(1.5));
  CHECK(half(1) == doctest::Approx(2.0));
  CHECK(agl::group_soft_threshold(Eigen::Vector2d::Zero(), 0.0).isZero(0));
}

TEST_CASE("objective on a hand-computed instance") {
  Eigen::MatrixXd z(4, 2);
  z << 1, 0, 0, 1, 1, 1, 0, 0;
  const auto d = agl::GroupedDesign<double>::from_matrix(z, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  agl::GroupedCoefficients<double> b{Eigen::Vector2d(1, 2), 2};
  // residual (0, -1, -2, 1): rss 6, penalty 2 * sqrt(5)
  CHECK(agl::objective(d, y, b, agl::PenaltySpec<double>::unit(1, 2.0)) == doctest::Approx(6.0 + 2.0 * std::sqrt(5.0)));
  CHECK(agl::objective(d, y, b, agl::PenaltySpec<double>::unit(1, 0.0)) == doctest::Approx(6.0));
  const auto zero = agl::GroupedCoefficients<double>::zeros(1, 2);
  CHECK(agl::objective(d, y, zero, agl::PenaltySpec<double>::unit(1, 7.0)) == doctest::Approx(4.0));

  agl::PenaltySpec<double> excluded{2.0, {kInf}};
  CHECK(agl::objective(d, y, zero, excluded) == doctest::Approx(4.0));
  CHECK_THROWS_AS(agl::objective(d, y, b, excluded), agl::Error);
  CHECK_THROWS_AS(agl::objective(d, Eigen::VectorXd::Ones(3).eval(), b, excluded), agl::Error);
}

TEST_CASE("lambda = 0 reproduces least squares") {
  const auto inst = random_instance(30, 3, 3, 1);
  const auto res = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>::unit(3, 0.0));
  const Eigen::VectorXd ls = oracle::least_squares(inst.design.z, inst.y);
  CHECK(res.diagnostics.converged);
  CHECK((res.coefficients.values - ls).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lambda_max") {
  const auto inst = random_instance(25, 4, 3, 2);
  const auto w = unit_weights(4);
  CHECK(agl::lambda_max(inst.design, Eigen::VectorXd::Zero(25).eval(), w) == 0.0);

  const auto single = random_instance(25, 1, 3, 3);
  CHECK(agl::lambda_max(single.design, single.y, unit_weights(1)) ==
        doctest::Approx(2.0 * (single.design.z.transpose() * single.y).norm()));

  const double lmax = agl::lambda_max(inst.design, inst.y, w);
  const auto above = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{1.01 * lmax, w});
  CHECK(above.coefficients.values.isZero(0));
  const auto below = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{0.99 * lmax, w});
  CHECK(below.coefficients.values.norm() > 0.0);

  const auto at = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{lmax, w});
  CHECK(at.coefficients.values.isZero(0));
  CHECK(agl::kkt_residual(inst.design, inst.y, at.coefficients, agl::PenaltySpec<double>{lmax, w}) == 0.0);

  CHECK_THROWS_AS(agl::lambda_max(inst.design, inst.y, std::vector<double>(4, kInf)), agl::Error);
  auto some = w;
  some[0] = kInf;
  CHECK(agl::lambda_max(inst.design, inst.y, some) <= lmax);
}

TEST_CASE("solver matches the accelerated proximal-gradient oracle") {
  std::mt19937_64 pick(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 12 + static_cast<Eigen::Index>(pick() % 19);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(pick() % 4);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(pick() % 3);
    const auto inst = random_instance(n, p, m, 100 + trial);
    std::vector<double> w(static_cast<std::size_t>(p));
    for (auto& v : w) v = 0.5 + static_cast<double>(pick() % 100) / 50.0;
    const double lambda = (0.05 + 0.9 * static_cast<double>(pick() % 100) / 100.0) * agl::lambda_max(inst.design, inst.y, w);
    const agl::PenaltySpec<double> pen{lambda, w};

    const auto res = agl::solve_group_lasso(inst.design, inst.y, pen);
    const Eigen::VectorXd ref = oracle::group_lasso(inst.design.z, inst.y, m, lambda, w);
    const long double f_ref = oracle::objective(inst.design.z, inst.y, ref, m, lambda, w);
    const long double f_sol = oracle::objective(inst.design.z, inst.y, res.coefficients.values, m, lambda, w);
    CAPTURE(trial);
    CHECK(res.diagnostics.converged);
    CHECK(std::abs(static_cast<double>(f_sol - f_ref)) <= 1e-6);
    CHECK(res.diagnostics.kkt_residual <= 1e-6);

    const agl::GroupedCoefficients<double> ref_beta{ref, m};
    CHECK(agl::kkt_residual(inst.design, inst.y, ref_beta, pen) <= 1e-6);
  }
}

TEST_CASE("kkt_residual detects a perturbed optimum") {
  const auto inst = random_instance(20, 3, 2, 5);
  const auto w = unit_weights(3);
  const agl::PenaltySpec<double> pen{0.3 * agl::lambda_max(inst.design, inst.y, w), w};
  const auto res = agl::solve_group_lasso(inst.design, inst.y, pen);
  auto beta = res.coefficients;
  Eigen::Index active = -1;
  for (Eigen::Index j = 0; j < 3; ++j)
    if (beta.group_norm(j) > 0) active = j;
  REQUIRE(active >= 0);
  beta.group(active)(0) += 0.1;
  CHECK(agl::kkt_residual(inst.design, inst.y, beta, pen) > 1e-3);

  const auto zero = agl::GroupedCoefficients<double>::zeros(3, 2);
  const agl::PenaltySpec<double> big{2.0 * agl::lambda_max(inst.design, inst.y, w), w};
  CHECK(agl::kkt_residual(inst.design, inst.y, zero, big) == 0.0);
}

TEST_CASE("objective trace is nonincreasing and converged fits carry the certificate") {
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(60, 8, 4, 200 + trial);
    const auto w = unit_weights(8);
    const agl::PenaltySpec<double> pen{0.1 * agl::lambda_max(inst.design, inst.y, w), w};
    const auto res = agl::solve_group_lasso(inst.design, inst.y, pen);
    const auto& trace = res.diagnostics.objective_trace;
    REQUIRE(!trace.empty());
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-12);
    CHECK(res.diagnostics.converged);
    CHECK(res.diagnostics.kkt_residual <= agl::SolverOptions{}.tol_kkt);
  }
}

TEST_CASE("sweep budget exhaustion is reported") {
  const auto inst = random_instance(40, 6, 3, 6);
  std::mt19937_64 rng(6);
  // correlated blocks need many sweeps
  Eigen::MatrixXd z = inst.design.z;
  z.middleCols(3, 3) = z.middleCols(0, 3) + 0.05 * oracle::orthonormal_blocks(oracle::random_matrix(40, 3, rng), 3);
  auto d = agl::GroupedDesign<double>::from_matrix(oracle::orthonormal_blocks(z, 3), 3);
  agl::SolverOptions opts;
  opts.max_sweeps = 1;
  opts.tol_objective = 1e-15;
  const auto res =
      agl::solve_group_lasso(d, inst.y, agl::PenaltySpec<double>::unit(6, 0.01 * agl::lambda_max(d, inst.y, unit_weights(6))), opts);
  CHECK_FALSE(res.diagnostics.converged);
  CHECK(res.diagnostics.sweeps <= 1);
}

TEST_CASE("permuting groups permutes the solution") {
  const auto inst = random_instance(50, 5, 3, 7);
  const std::vector<double> w{1.0, 0.5, 2.0, 1.5, 1.0};
  const double lambda = 0.2 * agl::lambda_max(inst.design, inst.y, w);
  const auto res = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{lambda, w});

  const std::vector<Eigen::Index> perm{3, 0, 4, 1, 2};
  Eigen::MatrixXd zp(50, 15);
  std::vector<double> wp(5);
  for (Eigen::Index k = 0; k < 5; ++k) {
    zp.middleCols(k * 3, 3) = inst.design.block(perm[static_cast<std::size_t>(k)]);
    wp[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
  }
  const auto dp = agl::GroupedDesign<double>::from_matrix(zp, 3);
  const auto resp = agl::solve_group_lasso(dp, inst.y, agl::PenaltySpec<double>{lambda, wp});
  CHECK((inst.design.z * res.coefficients.values - zp * resp.coefficients.values).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index k = 0; k < 5; ++k)
    CHECK((resp.coefficients.group(k) - res.coefficients.group(perm[static_cast<std::size_t>(k)])).norm() <= 1e-6);
}

TEST_CASE("warm and cold starts reach the same objective") {
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = random_instance(40, 6, 3, 300 + trial);
    const auto w = unit_weights(6);
    const double lmax = agl::lambda_max(inst.design, inst.y, w);
    const agl::PenaltySpec<double> pen{0.15 * lmax, w};
    const auto cold = agl::solve_group_lasso(inst.design, inst.y, pen);
    const auto prev = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{0.4 * lmax, w});
    const auto warm = agl::solve_group_lasso(inst.design, inst.y, pen, agl::SolverOptions{}, std::make_optional(prev.coefficients));
    CHECK(std::abs(cold.diagnostics.objective_trace.back() - warm.diagnostics.objective_trace.back()) <= 1e-6);
    CHECK(std::abs(agl::objective(inst.design, inst.y, cold.coefficients, pen) -
                   agl::objective(inst.design, inst.y, warm.coefficients, pen)) <= 1e-6);
  }
}

TEST_CASE("infinite weights exclude groups") {
  const auto inst = random_instance(40, 4, 3, 8);
  std::vector<double> w{1.0, kInf, 1.0, kInf};
  const agl::PenaltySpec<double> pen{0.05 * agl::lambda_max(inst.design, inst.y, w), w};

  auto warm = agl::GroupedCoefficients<double>::zeros(4, 3);
  warm.values.setOnes();
  const auto res = agl::solve_group_lasso(inst.design, inst.y, pen, agl::SolverOptions{}, std::make_optional(warm));
  CHECK(res.coefficients.group(1).isZero(0));
  CHECK(res.coefficients.group(3).isZero(0));
  CHECK(res.coefficients.group_norm(0) > 0);

  // same answer as dropping the excluded blocks
  Eigen::MatrixXd kept(40, 6);
  kept << inst.design.block(0), inst.design.block(2);
  const auto small = agl::solve_group_lasso(agl::GroupedDesign<double>::from_matrix(kept, 3), inst.y,
                                            agl::PenaltySpec<double>{pen.lambda, {1.0, 1.0}});
  CHECK((small.coefficients.group(0) - res.coefficients.group(0)).norm() <= 1e-6);
  CHECK((small.coefficients.group(1) - res.coefficients.group(2)).norm() <= 1e-6);
}

TEST_CASE("penalty validation") {
  const auto inst = random_instance(20, 2, 2, 9);
  CHECK_THROWS_AS(agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{-1.0, {1.0, 1.0}}), agl::Error);
  CHECK_THROWS_AS(agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{1.0, {1.0}}), agl::Error);
  CHECK_THROWS_AS(agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>{1.0, {1.0, -2.0}}), agl::Error);
}

TEST_CASE("ordinary Lasso equals the group Lasso with singleton groups") {
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = random_instance(30, 6, 1, 400 + trial);
    const double lambda = 0.2 * agl::ordinary_lambda_max(inst.design, inst.y);
    agl::SolverOptions tight;
    tight.tol_objective = 1e-14;
    tight.tol_kkt = 1e-10;
    const auto ordinary = agl::solve_ordinary_lasso(inst.design, inst.y, lambda, tight);
    const auto grouped = agl::solve_group_lasso(inst.design, inst.y, agl::PenaltySpec<double>::unit(6, lambda), tight);
    CHECK((ordinary.coefficients.values - grouped.coefficients.values).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("ordinary Lasso boundary cases") {
  std::mt19937_64 rng(10);
  // unnormalized columns in groups of three
  const Eigen::MatrixXd z = oracle::random_matrix(30, 6, rng) * 3.0;
  Eigen::VectorXd y = oracle::random_vector(30, rng);
  const auto d = agl::GroupedDesign<double>::from_matrix(z, 3);

  const auto ls = agl::solve_ordinary_lasso(d, y, 0.0);
  CHECK((ls.coefficients.values - oracle::least_squares(z, y)).cwiseAbs().maxCoeff() <= 1e-8);

  const double lmax = agl::ordinary_lambda_max(d, y);
  CHECK(lmax == doctest::Approx(2.0 * (z.transpose() * y).cwiseAbs().maxCoeff()));
  CHECK(agl::solve_ordinary_lasso(d, y, lmax).coefficients.values.isZero(0));
  CHECK(agl::solve_ordinary_lasso(d, y, 0.9 * lmax).coefficients.values.norm() > 0);

  const auto mid = agl::solve_ordinary_lasso(d, y, 0.3 * lmax);
  CHECK(mid.diagnostics.converged);
  CHECK(agl::ordinary_kkt_residual(d, y, mid.coefficients, 0.3 * lmax) <= 1e-6);
  CHECK_THROWS_AS(agl::solve_ordinary_lasso(d, y, -1.0), agl::Error);
}

TEST_CASE("long double instantiation") {
  const auto inst = random_instance(20, 2, 2, 11);
  const auto d = agl::GroupedDesign<long double>::from_matrix(inst.design.z.cast<long double>(), 2);
  const Eigen::Matrix<long double, Eigen::Dynamic, 1> y = inst.y.cast<long double>();
  agl::SolverOptions tight;
  tight.tol_objective = 1e-16;
  tight.tol_kkt = 1e-12;
  const auto res = agl::solve_group_lasso(d, y, agl::PenaltySpec<long double>::unit(2, 0.0L), tight);
  CHECK((res.coefficients.values.cast<double>() - oracle::least_squares(inst.design.z, inst.y)).cwiseAbs().maxCoeff() <=
        1e-10);
}
