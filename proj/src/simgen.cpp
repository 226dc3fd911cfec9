#include "agl/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cctype>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "agl/parallel.hpp"

namespace agl {

double GenConfig::noise_sd() const {
  if (sigma > 0.0) return sigma;
  return example == 1 ? 1.27 : 1.32;
}

void GenConfig::validate() const {
  if (example != 1 && example != 2) throw Error(ErrorCode::invalid_argument, "example must be 1 or 2");
  if (n < 10) throw Error(ErrorCode::invalid_argument, "simulation needs n >= 10");
  if (p < 4) throw Error(ErrorCode::invalid_argument, "simulation needs p >= 4");
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "correlation parameter t must be nonnegative");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::invalid_argument, "sigma must be finite");
}

double truncated_std_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double z = normal(rng);
    if (z >= 0.0 && z <= 1.0) return z;
  }
}

std::array<double, 4> true_components(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::out_of_domain, "true components are defined on [0, 1]");
  const double s = std::sin(2.0 * std::numbers::pi * u);
  const double c = std::cos(2.0 * std::numbers::pi * u);
  const double a = 2.0 * u - 1.0;
  return {5.0 * u, 3.0 * a * a, 4.0 * s / (2.0 - s),
          6.0 * (0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s)};
}

namespace {

void fill_response(GeneratedData& g, double sigma, Rng& rng) {
  const Eigen::Index n = g.dataset.x.rows();
  g.f_true.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) g.f_true(i, j) = true_components(g.dataset.x(i, j))[static_cast<std::size_t>(j)];
  }
  g.f_sum = g.f_true.rowwise().sum();
  std::normal_distribution<double> normal(0.0, sigma);
  g.noise.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) g.noise(i) = normal(rng);
  g.dataset.y = g.f_sum + g.noise;
  g.dataset.names.clear();
  for (Eigen::Index j = 0; j < g.dataset.x.cols(); ++j) g.dataset.names.push_back("x" + std::to_string(j + 1));
}

}  // namespace

GeneratedData gen_example1(const GenConfig& config) {
  config.validate();
  if (config.example != 1) throw Error(ErrorCode::invalid_argument, "gen_example1 needs example = 1");
  Rng rng(config.seed);
  GeneratedData g;
  g.dataset.x.resize(config.n, config.p);
  std::vector<double> w(static_cast<std::size_t>(config.p));
  const double t = config.t;
  for (Eigen::Index i = 0; i < config.n; ++i) {
    for (auto& v : w) v = truncated_std_normal(rng);
    const double u = truncated_std_normal(rng);
    [[maybe_unused]] const double u_prime = truncated_std_normal(rng);
    const double v = truncated_std_normal(rng);
    for (Eigen::Index k = 0; k < config.p; ++k) {
      const double common = k < 4 ? u : v;
      g.dataset.x(i, k) = (w[static_cast<std::size_t>(k)] + t * common) / (1.0 + t);
    }
  }
  fill_response(g, config.noise_sd(), rng);
  return g;
}

GeneratedData gen_example2(const GenConfig& config) {
  config.validate();
  if (config.example != 2) throw Error(ErrorCode::invalid_argument, "gen_example2 needs example = 2");
  Rng rng(config.seed);
  GeneratedData g;
  g.dataset.x.resize(config.n, config.p);
  std::vector<double> w(static_cast<std::size_t>(config.p));
  const double t = config.t;
  for (Eigen::Index i = 0; i < config.n; ++i) {
    for (auto& v : w) v = truncated_std_normal(rng);
    const double u = truncated_std_normal(rng);
    for (Eigen::Index k = 0; k < config.p; ++k) {
      g.dataset.x(i, k) = (w[static_cast<std::size_t>(k)] + t * u) / (1.0 + t);
    }
  }
  fill_response(g, config.noise_sd(), rng);
  return g;
}

GeneratedData generate(const GenConfig& config) {
  return config.example == 1 ? gen_example1(config) : gen_example2(config);
}

double model_error(const Eigen::VectorXd& fitted, const Eigen::VectorXd& f_sum) {
  if (fitted.size() != f_sum.size() || fitted.size() == 0) {
    throw Error(ErrorCode::dimension_mismatch, "fitted and true mean vectors differ in length");
  }
  return (fitted - f_sum).squaredNorm() / static_cast<double>(fitted.size());
}

double model_error(const ModelFit& fit, const GeneratedData& gen) {
  return model_error(predict(fit, gen.dataset.x), gen.f_sum);
}

double component_error(const Eigen::MatrixXd& fitted_components, const GeneratedData& gen) {
  const Eigen::Index n = gen.dataset.n();
  if (fitted_components.rows() != n || fitted_components.cols() != gen.dataset.p()) {
    throw Error(ErrorCode::dimension_mismatch, "component matrix must be n x p");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < fitted_components.cols(); ++j) {
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(n);
    if (j < gen.f_true.cols()) truth = gen.f_true.col(j).array() - gen.f_true.col(j).mean();
    total += (fitted_components.col(j) - truth).squaredNorm() / static_cast<double>(n);
  }
  return total;
}

RepMetrics eval_selection(const std::vector<Eigen::Index>& selected, const std::vector<Eigen::Index>& truth_set) {
  std::vector<Eigen::Index> sel = selected;
  std::vector<Eigen::Index> truth = truth_set;
  std::sort(sel.begin(), sel.end());
  sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
  std::sort(truth.begin(), truth.end());
  RepMetrics m;
  m.nv = static_cast<Eigen::Index>(sel.size());
  m.inc = std::includes(sel.begin(), sel.end(), truth.begin(), truth.end());
  m.cs = sel == truth;
  return m;
}

RepMetrics eval_selection(const ModelFit& fit, const std::vector<Eigen::Index>& truth_set) {
  return eval_selection(fit.selected, truth_set);
}

double snr_estimate(const ModelFit& fit, const Dataset& data) {
  const Eigen::VectorXd fhat = predict(fit, data.x).array() - fit.mu_hat;
  const double signal = fhat.squaredNorm();
  const double resid = (data.y.array() - fit.mu_hat - fhat.array()).matrix().squaredNorm();
  if (resid == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(signal / resid);
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::agl: return "AGL";
    case Method::gl: return "GL";
    case Method::olasso: return "OLasso";
    case Method::linear_lasso: return "LinearLasso";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  for (Method m : all_methods()) {
    if (text == to_string(m)) return m;
  }
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "agl") return Method::agl;
  if (lower == "gl") return Method::gl;
  if (lower == "olasso") return Method::olasso;
  if (lower == "linearlasso" || lower == "linear") return Method::linear_lasso;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + text + "'");
}

std::vector<Method> all_methods() { return {Method::agl, Method::gl, Method::olasso, Method::linear_lasso}; }

const MethodSummary& SummaryTable::row(Method m) const {
  for (const auto& r : rows) {
    if (r.method == m) return r;
  }
  throw Error(ErrorCode::invalid_argument, std::string("method not in table: ") + agl::to_string(m));
}

namespace {

/// Per-component fitted values Z_j beta_j at the training points.
Eigen::MatrixXd fitted_components(const Design& design, const Coefficients& beta) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(design.n(), design.num_groups());
  for (Eigen::Index j = 0; j < design.num_groups(); ++j) {
    out.col(j) = design.block(j) * beta.group(j);
  }
  return out;
}

std::vector<Eigen::Index> nonzero_groups(const Coefficients& beta) {
  std::vector<Eigen::Index> selected;
  for (Eigen::Index j = 0; j < beta.num_groups(); ++j) {
    if (beta.group_norm(j) > kZeroNorm) selected.push_back(j);
  }
  return selected;
}

MethodOutcome outcome_from(const Design& design, const Coefficients& beta, double mu, const GeneratedData& gen,
                           const std::vector<Eigen::Index>& selected) {
  MethodOutcome o;
  const Eigen::MatrixXd comps = fitted_components(design, beta);
  o.metrics = eval_selection(selected, gen.truth_set);
  const Eigen::VectorXd fitted = (comps.rowwise().sum().array() + mu).matrix();
  o.metrics.me = model_error(fitted, gen.f_sum);
  o.component_error = component_error(comps, gen);
  return o;
}

Coefficients ordinary_tuned(const Design& design, const Eigen::VectorXd& y, const TuningConfig& tuning) {
  const double lmax = ordinary_lambda_max(design, y);
  if (!(lmax > 0.0)) return Coefficients::zeros(design.num_groups(), design.group_size);
  auto path = fit_ordinary_path(design, y, make_grid(lmax, tuning.grid_size, tuning.grid_ratio), tuning.solver,
                                tuning.nu);
  return path[select_lambda(path, tuning.criterion)].coefficients;
}

template <typename F>
MethodOutcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    MethodOutcome o;
    o.failed = true;
    o.failure = e.what();
    return o;
  }
}

}  // namespace

std::vector<MethodOutcome> run_methods(const GeneratedData& gen, const std::vector<Method>& methods,
                                       const TuningConfig& tuning) {
  std::vector<MethodOutcome> out(methods.size());
  const bool needs_spline = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m != Method::linear_lasso;
  });
  const bool needs_tuned = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::agl || m == Method::gl;
  });

  std::optional<PreparedProblem> problem;
  std::optional<TunedFit> tuned;
  std::string setup_failure;
  try {
    if (needs_spline) problem = prepare(gen.dataset, tuning.basis);
    if (needs_tuned) tuned = fit_tuned(*problem, tuning);
  } catch (const std::exception& e) {
    setup_failure = e.what();
  }

  for (std::size_t i = 0; i < methods.size(); ++i) {
    const Method m = methods[i];
    out[i] = guarded([&]() -> MethodOutcome {
      if (m != Method::linear_lasso && !setup_failure.empty()) throw std::runtime_error(setup_failure);
      switch (m) {
        case Method::agl:
        case Method::gl: {
          const ModelFit& fit = m == Method::agl ? tuned->adaptive : tuned->group;
          Coefficients psi = Coefficients::zeros(problem->centered.num_groups(), problem->centered.group_size);
          for (const auto& c : fit.components) psi.group(c.index) = c.coefficients;
          return outcome_from(problem->centered, psi, fit.mu_hat, gen, fit.selected);
        }
        case Method::olasso: {
          const Coefficients beta = ordinary_tuned(problem->centered, problem->y, tuning);
          return outcome_from(problem->centered, beta, problem->mu_hat, gen, nonzero_groups(beta));
        }
        case Method::linear_lasso: {
          auto [scaled, scale] = scale_covariates(gen.dataset.x);
          Eigen::MatrixXd centered = scaled.rowwise() - scaled.colwise().mean();
          const Design design = Design::from_matrix(std::move(centered), 1);
          auto [y, mu] = center_response(gen.dataset.y);
          const Coefficients beta = ordinary_tuned(design, y, tuning);
          return outcome_from(design, beta, mu, gen, nonzero_groups(beta));
        }
      }
      throw std::logic_error("unhandled method");
    });
  }
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

MethodSummary summarize(Method m, const std::vector<MethodOutcome>& outcomes) {
  MethodSummary s;
  s.method = m;
  std::vector<double> nv, me, in, cs, ce;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    nv.push_back(static_cast<double>(o.metrics.nv));
    me.push_back(o.metrics.me);
    in.push_back(o.metrics.inc ? 100.0 : 0.0);
    cs.push_back(o.metrics.cs ? 100.0 : 0.0);
    ce.push_back(o.component_error);
  }
  s.nv_mean = mean_of(nv);
  s.nv_se = sd_of(nv);
  s.me_mean = mean_of(me);
  s.me_se = sd_of(me);
  s.in_pct = mean_of(in);
  s.in_se = sd_of(in);
  s.cs_pct = mean_of(cs);
  s.cs_se = sd_of(cs);
  s.component_error_mean = mean_of(ce);
  return s;
}

SummaryTable run_replications(const GenConfig& config, const std::vector<Method>& methods, Criterion criterion,
                              int reps, const SimulationOptions& options) {
  config.validate();
  if (reps < 1) throw Error(ErrorCode::invalid_argument, "replication count must be positive");
  if (methods.empty()) throw Error(ErrorCode::invalid_argument, "at least one method is required");
  TuningConfig tuning = options.tuning;
  tuning.criterion = criterion;

  std::vector<std::vector<MethodOutcome>> per_rep(static_cast<std::size_t>(reps));
  parallel_for(per_rep.size(), options.threads, [&](std::size_t r) {
    GenConfig c = config;
    c.seed = derive_seed(config.seed, r);
    per_rep[r] = run_methods(generate(c), methods, tuning);
  });

  SummaryTable table;
  table.config = config;
  table.criterion = criterion;
  table.reps = reps;
  table.outcomes.resize(methods.size());
  for (std::size_t k = 0; k < methods.size(); ++k) {
    for (const auto& rep : per_rep) table.outcomes[k].push_back(rep[k]);
    table.rows.push_back(summarize(methods[k], table.outcomes[k]));
  }
  return table;
}

}  // namespace agl
