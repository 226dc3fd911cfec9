#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "agl/pipeline.hpp"
#include "oracles.hpp"

namespace {

agl::Dataset additive_data(Eigen::Index n, Eigen::Index p, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 3.0);
  std::normal_distribution<double> normal;
  agl::Dataset d;
  d.x.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = unif(rng);
    d.y(i) = 1.5 + 2.0 * std::sin(d.x(i, 0)) + 0.5 * d.x(i, 1) * d.x(i, 1) + noise * normal(rng);
  }
  return d;
}

double group_lambda_max(const agl::PreparedProblem& prob) {
  return agl::lambda_max(prob.orthonormal, prob.y, std::vector<double>(static_cast<std::size_t>(prob.orthonormal.num_groups()), 1.0));
}

bool subset_of(const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  return std::all_of(a.begin(), a.end(), [&](Eigen::Index v) { return std::find(b.begin(), b.end(), v) != b.end(); });
}

std::vector<Eigen::Index> support(const agl::Coefficients& c) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < c.num_groups(); ++j)
    if (c.group_norm(j) > agl::kZeroNorm) out.push_back(j);
  return out;
}

}  // namespace

TEST_CASE("adaptive_weights") {
  agl::Coefficients c = agl::Coefficients::zeros(3, 2);
  c.group(0) << 2.0, 0.0;
  c.group(2) << 0.0, -0.5;
  const auto w = agl::adaptive_weights(c);
  REQUIRE(w.weights.size() == 3);
  CHECK(w.weights[0] == 0.5);
  CHECK(std::isinf(w.weights[1]));
  CHECK(w.excluded(1));
  CHECK_FALSE(w.excluded(0));
  CHECK(w.weights[2] == doctest::Approx(2.0));

  agl::Coefficients eq = agl::Coefficients::zeros(4, 3);
  for (Eigen::Index j = 0; j < 4; ++j) eq.group(j) << 3.0, 0.0, 4.0;
  for (double v : agl::adaptive_weights(eq).weights) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("pure noise at lambda_max selects nothing") {
  std::mt19937_64 rng(1);
  agl::Dataset d;
  d.x = (oracle::random_matrix(60, 4, rng).array() + 5.0).matrix();
  d.y = oracle::random_vector(60, rng);
  const auto prob = agl::prepare(d, agl::default_basis());
  const double lmax = group_lambda_max(prob);
  const auto res = agl::two_step_fit(prob, lmax, 0.0);
  CHECK(res.fit.selected.empty());
  for (const auto& c : res.fit.components) CHECK(c.coefficients.isZero(0));
  CHECK(res.fit.mu_hat == doctest::Approx(d.y.mean()));
  CHECK(res.fit.df == 0.0);
  CHECK(res.fit.rss == doctest::Approx(prob.y.squaredNorm()));
  CHECK(agl::predict(res.fit, d.x).isApproxToConstant(d.y.mean()));
}

TEST_CASE("Step-2 support is contained in the Step-1 support") {
  std::mt19937_64 pick(2);
  for (int trial = 0; trial < 12; ++trial) {
    const auto d = additive_data(80, 6, 0.5 + trial * 0.2, 50 + trial);
    const auto prob = agl::prepare(d, agl::default_basis());
    const double lmax = group_lambda_max(prob);
    const double l1 = lmax * std::pow(10.0, -2.0 * static_cast<double>(pick() % 100) / 100.0);
    const double l2 = lmax * std::pow(10.0, -3.0 * static_cast<double>(pick() % 100) / 100.0);
    const auto res = agl::two_step_fit(prob, l1, l2);
    CAPTURE(trial);
    CHECK(subset_of(res.fit.selected, support(res.step1)));
    CHECK(subset_of(support(res.step2), support(res.step1)));
    for (Eigen::Index j = 0; j < 6; ++j)
      if (res.weights.excluded(j)) CHECK(res.step2.group(j).isZero(0));
  }
}

TEST_CASE("ModelFit invariants") {
  const auto d = additive_data(120, 5, 0.3, 3);
  const auto prob = agl::prepare(d, agl::default_basis());
  const double lmax = group_lambda_max(prob);
  const auto fit = agl::two_step_fit(prob, 0.05 * lmax, 0.02 * lmax).fit;
  const Eigen::Index m = prob.centered.group_size;

  REQUIRE(!fit.selected.empty());
  CHECK(fit.df == static_cast<double>(fit.selected.size() * static_cast<std::size_t>(m)));
  CHECK(fit.lambda1 == 0.05 * lmax);
  CHECK(fit.lambda2 == 0.02 * lmax);

  Eigen::VectorXd beta(prob.centered.z.cols());
  for (const auto& c : fit.components) {
    beta.segment(c.index * m, m) = c.coefficients;
    CHECK(std::abs(c.norm - c.coefficients.norm()) <= 1e-12);
    const bool sel = std::find(fit.selected.begin(), fit.selected.end(), c.index) != fit.selected.end();
    CHECK(sel == fit.is_selected(c.index));
    if (sel) {
      CHECK(c.norm > 0.0);
      CHECK(c.coefficients.cwiseAbs().maxCoeff() > 0.0);
    } else {
      CHECK(c.coefficients.isZero(0));
    }
  }
  CHECK(std::abs(fit.rss - (prob.y - prob.centered.z * beta).squaredNorm()) <= 1e-8);
  CHECK(fit.mu_hat == doctest::Approx(d.y.mean()));
}

TEST_CASE("prediction at training points reproduces the design product") {
  const auto d = additive_data(100, 4, 0.4, 4);
  const auto prob = agl::prepare(d, agl::default_basis());
  const double lmax = group_lambda_max(prob);
  const auto fit = agl::two_step_fit(prob, 0.1 * lmax, 0.01 * lmax).fit;

  Eigen::VectorXd total = Eigen::VectorXd::Constant(100, fit.mu_hat);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXd block = prob.centered.block(j) * fit.components[static_cast<std::size_t>(j)].coefficients;
    const Eigen::VectorXd fj = agl::predict_component(fit, j, d.x.col(j));
    CHECK((fj - block).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(fj.mean()) <= 1e-8);
    if (!fit.is_selected(j)) CHECK(fj.isZero(0));
    total += block;
  }
  CHECK((agl::predict(fit, d.x) - total).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(agl::predict(fit, Eigen::VectorXd(d.x.row(i))) - total(i)) <= 1e-10);
}

TEST_CASE("prediction is additive") {
  const auto d = additive_data(100, 3, 0.4, 5);
  const auto fit = agl::two_step_fit(d, agl::default_basis(), 5.0, 1.0);
  REQUIRE(fit.is_selected(0));
  Eigen::VectorXd row = d.x.row(7);
  const double before = agl::predict(fit, row);
  const double old_f0 = agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, row(0)))(0);
  row(0) = 0.5;
  const double new_f0 = agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, row(0)))(0);
  CHECK(agl::predict(fit, row) - before == doctest::Approx(new_f0 - old_f0));
}

TEST_CASE("an all-zero fit predicts the response mean") {
  const auto d = additive_data(50, 3, 0.4, 6);
  const auto fit = agl::two_step_fit(d, agl::default_basis(), 1e12, 0.0);
  CHECK(fit.selected.empty());
  CHECK(agl::predict(fit, Eigen::VectorXd(d.x.row(3))) == doctest::Approx(d.y.mean()));
}

TEST_CASE("out-of-range covariates") {
  const auto d = additive_data(60, 2, 0.4, 7);
  const auto fit = agl::two_step_fit(d, agl::default_basis(), 1.0, 0.5);
  const double hi = d.x.col(0).maxCoeff();
  const double lo = d.x.col(0).minCoeff();
  try {
    agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, hi + 1.0));
    FAIL("expected out-of-domain error");
  } catch (const agl::Error& e) {
    CHECK(e.code() == agl::ErrorCode::out_of_domain);
  }
  const auto clamped = agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, hi + 1.0), agl::OutOfRange::clamp);
  const auto edge = agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, hi));
  CHECK(clamped(0) == doctest::Approx(edge(0)));
  CHECK_NOTHROW(agl::predict_component(fit, 0, Eigen::VectorXd::Constant(1, lo)));
  CHECK_THROWS_AS(agl::predict_component(fit, 2, Eigen::VectorXd::Zero(1)), agl::Error);
  CHECK_THROWS_AS(agl::two_step_fit(d, agl::default_basis(), -1.0, 0.0), agl::Error);
}

TEST_CASE("unpenalized fit equals least squares on the centered design") {
  const auto d = additive_data(90, 3, 0.5, 8);
  const auto prob = agl::prepare(d, agl::make_basis(0.0, 1.0, 4, 3));
  agl::SolverOptions tight;
  tight.tol_objective = 1e-16;
  tight.tol_kkt = 1e-10;
  const auto fit = agl::two_step_fit(prob, 0.0, 0.0, tight).fit;
  const Eigen::VectorXd ls = oracle::least_squares(prob.centered.z, prob.y);
  const Eigen::VectorXd expected = prob.centered.z * ls;
  CHECK((agl::predict(fit, d.x).array() - fit.mu_hat - expected.array()).abs().maxCoeff() <= 1e-8);
}
