#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "agl/pipeline.hpp"
#include "agl/selection.hpp"

namespace agl {

using Rng = std::mt19937_64;

/// Monte Carlo design. `sigma <= 0` selects the example's own noise level
/// (1.27 for example 1, 1.32 for example 2).
struct GenConfig {
  int example = 2;
  Eigen::Index n = 200;
  Eigen::Index p = 10;
  double t = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 1;

  double noise_sd() const;
  void validate() const;
};

/// Standard normal draw conditioned on [0, 1] by rejection.
double truncated_std_normal(Rng& rng);

/// The four nonzero additive components at u in [0, 1].
std::array<double, 4> true_components(double u);

struct GeneratedData {
  Dataset dataset;
  Eigen::MatrixXd f_true;  // n x 4
  Eigen::VectorXd f_sum;
  Eigen::VectorXd noise;
  std::vector<Eigen::Index> truth_set{0, 1, 2, 3};
};

/// Signal covariates 1-4 share factor u, the rest share an independent v.
GeneratedData gen_example1(const GenConfig& config);
/// All covariates share a single factor.
GeneratedData gen_example2(const GenConfig& config);
/// Dispatches on config.example.
GeneratedData generate(const GenConfig& config);

/// n^-1 sum_i (fitted_i - f(x_i))^2 against the true conditional mean.
double model_error(const Eigen::VectorXd& fitted, const Eigen::VectorXd& f_sum);
double model_error(const ModelFit& fit, const GeneratedData& gen);

/// sum_j ||fhat_j - f_j||_n^2 over all p components, each true component
/// centered at its training mean (the fitted ones are centered by construction).
double component_error(const Eigen::MatrixXd& fitted_components, const GeneratedData& gen);

struct RepMetrics {
  Eigen::Index nv = 0;
  double me = 0.0;
  bool inc = false;
  bool cs = false;
};

RepMetrics eval_selection(const std::vector<Eigen::Index>& selected, const std::vector<Eigen::Index>& truth_set);
RepMetrics eval_selection(const ModelFit& fit, const std::vector<Eigen::Index>& truth_set);

/// sqrt(sum_i fhat(x_i)^2 / sum_i (y_i - mu_hat - fhat(x_i))^2) with fhat the
/// sum of fitted components; +inf when the residual is exactly zero.
double snr_estimate(const ModelFit& fit, const Dataset& data);

enum class Method { agl, gl, olasso, linear_lasso };

const char* to_string(Method m) noexcept;
Method parse_method(const std::string& text);
std::vector<Method> all_methods();

/// One method's outcome on one replication.
struct MethodOutcome {
  RepMetrics metrics;
  double component_error = 0.0;
  bool failed = false;
  std::string failure;
};

struct MethodSummary {
  Method method = Method::agl;
  double nv_mean = 0.0, nv_se = 0.0;
  double me_mean = 0.0, me_se = 0.0;
  double in_pct = 0.0, in_se = 0.0;
  double cs_pct = 0.0, cs_se = 0.0;
  double component_error_mean = 0.0;
  int succeeded = 0;
  int failed = 0;
};

/// Replication means with the across-replication standard deviations in the
/// *_se fields (IN and CS in percent units).
struct SummaryTable {
  GenConfig config;
  Criterion criterion = Criterion::bic;
  int reps = 0;
  std::vector<MethodSummary> rows;
  /// outcomes[method][rep]
  std::vector<std::vector<MethodOutcome>> outcomes;

  const MethodSummary& row(Method m) const;
};

struct SimulationOptions {
  TuningConfig tuning;
  unsigned threads = 0;
};

/// Runs every method on one generated dataset with criterion-tuned penalties.
std::vector<MethodOutcome> run_methods(const GeneratedData& gen, const std::vector<Method>& methods,
                                       const TuningConfig& tuning);

/// Replication r draws its data with seed derive_seed(config.seed, r).
SummaryTable run_replications(const GenConfig& config, const std::vector<Method>& methods, Criterion criterion,
                              int reps, const SimulationOptions& options = {});

MethodSummary summarize(Method m, const std::vector<MethodOutcome>& outcomes);

}  // namespace agl
