#include "agl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "agl/parallel.hpp"

namespace agl {

const char* to_string(Criterion c) noexcept { return c == Criterion::bic ? "bic" : "ebic"; }

Criterion parse_criterion(const std::string& text) {
  if (text == "bic" || text == "BIC") return Criterion::bic;
  if (text == "ebic" || text == "EBIC") return Criterion::ebic;
  throw Error(ErrorCode::invalid_argument, "unknown criterion '" + text + "' (expected bic or ebic)");
}

double bic(double rss, double df, Eigen::Index n) {
  if (!(rss > 0.0)) throw Error(ErrorCode::nonpositive_rss, "criterion undefined for nonpositive rss");
  if (n < 2) throw Error(ErrorCode::invalid_argument, "criterion needs n >= 2");
  if (!(df >= 0.0)) throw Error(ErrorCode::invalid_argument, "degrees of freedom must be nonnegative");
  const double nn = static_cast<double>(n);
  return std::log(rss) + df * std::log(nn) / nn;
}

double ebic(double rss, double df, Eigen::Index n, Eigen::Index p, double nu) {
  if (p < 1) throw Error(ErrorCode::invalid_argument, "ebic needs p >= 1");
  if (!(nu >= 0.0 && nu <= 1.0)) throw Error(ErrorCode::invalid_argument, "ebic needs 0 <= nu <= 1");
  return bic(rss, df, n) + nu * df * std::log(static_cast<double>(p)) / static_cast<double>(n);
}

LambdaGrid make_grid(double lambda_max, int count, double ratio) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error(ErrorCode::invalid_argument, "grid needs a finite positive lambda_max");
  }
  if (count < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least two points");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::invalid_argument, "grid ratio must lie in (0, 1)");
  LambdaGrid grid;
  grid.ratio = ratio;
  grid.count = count;
  grid.values.resize(static_cast<std::size_t>(count));
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  grid.values.front() = lambda_max;
  for (int i = 1; i < count - 1; ++i) grid.values[static_cast<std::size_t>(i)] = lambda_max * std::exp(step * i);
  grid.values.back() = lambda_max * ratio;
  return grid;
}

CriterionValue evaluate_criteria(double lambda, double rss, Eigen::Index num_selected, Eigen::Index group_size,
                                 Eigen::Index n, Eigen::Index p, double nu) {
  CriterionValue cv;
  cv.lambda = lambda;
  cv.rss = rss;
  cv.num_selected = num_selected;
  cv.df = static_cast<double>(num_selected) * static_cast<double>(group_size);
  if (rss > 0.0) {
    cv.bic = bic(rss, cv.df, n);
    cv.ebic = ebic(rss, cv.df, n, p, nu);
  } else {
    cv.degenerate = true;
    cv.bic = -std::numeric_limits<double>::infinity();
    cv.ebic = -std::numeric_limits<double>::infinity();
  }
  return cv;
}

namespace {

Eigen::Index count_selected(const Coefficients& beta) {
  Eigen::Index q = 0;
  for (Eigen::Index j = 0; j < beta.num_groups(); ++j) q += beta.group_norm(j) > kZeroNorm;
  return q;
}

/// Residual sum of squares with sub-threshold groups zeroed, matching the
/// fit assembled for reporting.
double reported_rss(const Design& design, const Eigen::VectorXd& y, const Coefficients& beta) {
  Eigen::VectorXd r = y;
  for (Eigen::Index j = 0; j < beta.num_groups(); ++j) {
    if (beta.group_norm(j) > kZeroNorm) r.noalias() -= design.block(j) * beta.group(j);
  }
  return r.squaredNorm();
}

PathPoint make_point(const Design& design, const Eigen::VectorXd& y, double lambda, SolveResult<double>&& s,
                     double nu) {
  PathPoint pt;
  pt.criterion = evaluate_criteria(lambda, reported_rss(design, y, s.coefficients), count_selected(s.coefficients),
                                   design.group_size, design.n(), design.num_groups(), nu);
  pt.coefficients = std::move(s.coefficients);
  pt.diagnostics = std::move(s.diagnostics);
  return pt;
}

}  // namespace

std::vector<PathPoint> fit_path(const Design& design, const Eigen::VectorXd& y, const std::vector<double>& weights,
                                const LambdaGrid& grid, const SolverOptions& opts, double nu) {
  std::vector<PathPoint> path;
  path.reserve(grid.values.size());
  std::optional<Coefficients> warm;
  for (const double lambda : grid.values) {
    auto s = solve_group_lasso(design, y, Penalty{lambda, weights}, opts, warm);
    warm = s.coefficients;
    path.push_back(make_point(design, y, lambda, std::move(s), nu));
  }
  return path;
}

std::vector<PathPoint> fit_ordinary_path(const Design& design, const Eigen::VectorXd& y, const LambdaGrid& grid,
                                         const SolverOptions& opts, double nu) {
  std::vector<PathPoint> path;
  path.reserve(grid.values.size());
  std::optional<Coefficients> warm;
  for (const double lambda : grid.values) {
    auto s = solve_ordinary_lasso(design, y, lambda, opts, warm);
    warm = s.coefficients;
    path.push_back(make_point(design, y, lambda, std::move(s), nu));
  }
  return path;
}

std::size_t select_lambda(const std::vector<CriterionValue>& path, Criterion criterion) {
  std::size_t best = path.size();
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].degenerate) continue;
    if (best == path.size() || path[i].value(criterion) < path[best].value(criterion)) best = i;
  }
  if (best == path.size()) {
    throw Error(ErrorCode::nonpositive_rss, "every path point has zero residual sum of squares");
  }
  return best;
}

std::size_t select_lambda(const std::vector<PathPoint>& path, Criterion criterion) {
  std::vector<CriterionValue> values;
  values.reserve(path.size());
  for (const auto& pt : path) values.push_back(pt.criterion);
  return select_lambda(values, criterion);
}

namespace {

std::vector<CriterionValue> criteria_of(const std::vector<PathPoint>& path) {
  std::vector<CriterionValue> out;
  out.reserve(path.size());
  for (const auto& pt : path) out.push_back(pt.criterion);
  return out;
}

FitDiagnostics trivial_diagnostics(const Eigen::VectorXd& y) {
  FitDiagnostics d;
  d.converged = true;
  d.objective_trace.push_back(y.squaredNorm());
  return d;
}

}  // namespace

TunedFit fit_tuned(const PreparedProblem& problem, const TuningConfig& config) {
  const Design& d = problem.orthonormal;
  const Eigen::VectorXd& y = problem.y;
  const Eigen::Index p = d.num_groups();
  const Coefficients zero = Coefficients::zeros(p, d.group_size);

  TunedFit out;
  const std::vector<double> unit(static_cast<std::size_t>(p), 1.0);
  const double lmax1 = lambda_max(d, y, unit);
  if (!(lmax1 > 0.0)) {
    // y is orthogonal to every group: the zero fit is optimal for all lambda.
    out.step1_path.push_back(evaluate_criteria(0.0, y.squaredNorm(), 0, d.group_size, d.n(), p, config.nu));
    out.group = assemble_fit(problem, d, zero, 0.0, 0.0, trivial_diagnostics(y), {});
    out.adaptive = out.group;
    out.weights = adaptive_weights(zero);
    return out;
  }

  auto path1 = fit_path(d, y, unit, make_grid(lmax1, config.grid_size, config.grid_ratio), config.solver, config.nu);
  out.step1_path = criteria_of(path1);
  out.step1_index = select_lambda(out.step1_path, config.criterion);
  const PathPoint& chosen1 = path1[out.step1_index];
  const double lambda1 = chosen1.criterion.lambda;
  out.group = assemble_fit(problem, d, chosen1.coefficients, lambda1, 0.0, chosen1.diagnostics, {});
  out.weights = adaptive_weights(chosen1.coefficients);

  const bool any_kept =
      std::any_of(out.weights.weights.begin(), out.weights.weights.end(), [](double w) { return !std::isinf(w); });
  const double lmax2 = any_kept ? lambda_max(d, y, out.weights.weights) : 0.0;
  if (!(lmax2 > 0.0)) {
    out.adaptive = assemble_fit(problem, d, zero, lambda1, 0.0, chosen1.diagnostics, trivial_diagnostics(y));
    return out;
  }

  auto path2 = fit_path(d, y, out.weights.weights, make_grid(lmax2, config.grid_size, config.grid_ratio),
                        config.solver, config.nu);
  out.step2_path = criteria_of(path2);
  out.step2_index = select_lambda(out.step2_path, config.criterion);
  const PathPoint& chosen2 = path2[out.step2_index];
  out.adaptive = assemble_fit(problem, d, chosen2.coefficients, lambda1, chosen2.criterion.lambda,
                              chosen1.diagnostics, chosen2.diagnostics);
  return out;
}

TunedFit fit_tuned(const Dataset& data, const TuningConfig& config) {
  return fit_tuned(prepare(data, config.basis), config);
}

Eigen::VectorXd marginal_correlations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error(ErrorCode::dimension_mismatch, "covariate rows do not match response length");
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double ynorm = yc.norm();
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(x.cols());
  if (ynorm == 0.0) return corr;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd xc = x.col(j).array() - x.col(j).mean();
    const double xnorm = xc.norm();
    if (xnorm == 0.0) continue;
    corr(j) = xc.dot(yc) / (xnorm * ynorm);
  }
  return corr;
}

std::vector<ScreenEntry> marginal_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index top_k) {
  if (top_k < 1 || top_k > x.cols()) {
    throw Error(ErrorCode::invalid_argument, "top_k must lie in [1, p]");
  }
  const Eigen::VectorXd corr = marginal_correlations(x, y);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(corr(a)) > std::abs(corr(b)); });
  std::vector<ScreenEntry> out;
  out.reserve(static_cast<std::size_t>(top_k));
  for (Eigen::Index i = 0; i < top_k; ++i) {
    const Eigen::Index j = order[static_cast<std::size_t>(i)];
    out.push_back({j, corr(j)});
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "cross-validation needs k >= 2");
  if (n < 2 * static_cast<Eigen::Index>(k)) {
    throw Error(ErrorCode::fold_too_small, "cross-validation needs n >= 2k");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < perm.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(perm[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvResult kfold_cv(const Dataset& data, int k, const TuningConfig& config, std::uint64_t seed, unsigned threads) {
  data.validate();
  CvResult res;
  res.folds = k;
  res.fold_indices = make_folds(data.n(), k, seed);
  res.per_fold_pe.assign(static_cast<std::size_t>(k), 0.0);
  res.per_fold_selected.assign(static_cast<std::size_t>(k), 0);

  parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t f) {
    const auto& held = res.fold_indices[f];
    std::vector<Eigen::Index> train;
    train.reserve(static_cast<std::size_t>(data.n()) - held.size());
    std::size_t h = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (h < held.size() && held[h] == i) {
        ++h;
        continue;
      }
      train.push_back(i);
    }
    const Dataset test = data.subset(held);
    const TunedFit tuned = fit_tuned(data.subset(train), config);
    const Eigen::VectorXd pred = predict(tuned.adaptive, test.x, OutOfRange::clamp);
    res.per_fold_pe[f] = (test.y - pred).squaredNorm() / static_cast<double>(test.n());
    res.per_fold_selected[f] = static_cast<Eigen::Index>(tuned.adaptive.selected.size());
  });

  res.mean_pe = std::accumulate(res.per_fold_pe.begin(), res.per_fold_pe.end(), 0.0) / k;
  res.mean_selected =
      static_cast<double>(std::accumulate(res.per_fold_selected.begin(), res.per_fold_selected.end(), Eigen::Index{0})) /
      k;
  return res;
}

std::vector<CvResult> repeated_cv(const Dataset& data, int k, const TuningConfig& config, std::uint64_t seed,
                                  int repetitions, unsigned threads) {
  if (repetitions < 1) throw Error(ErrorCode::invalid_argument, "repetition count must be positive");
  std::vector<CvResult> out(static_cast<std::size_t>(repetitions));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = kfold_cv(data, k, config, derive_seed(seed, r), 1);
  });
  return out;
}

}  // namespace agl
