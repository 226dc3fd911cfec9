#include <CLI11.hpp>

#include <iostream>

#include "agl/cli.hpp"

namespace {

void add_model_options(CLI::App* app, agl::RunConfig& c) {
  app->add_option("--degree", c.degree, "spline degree")->capture_default_str();
  app->add_option("--knots", c.knots, "number of interior knots")->capture_default_str();
  app->add_option("--criterion", c.criterion, "penalty selection criterion")
      ->check(CLI::IsMember({"bic", "ebic"}))
      ->capture_default_str();
  app->add_option("--nu", c.nu, "EBIC weight on log(p)")->capture_default_str();
  app->add_option("--grid-size", c.grid_size, "points per lambda path")->capture_default_str();
  app->add_option("--grid-ratio", c.grid_ratio, "lambda_min / lambda_max")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads (0 = hardware concurrency)")->capture_default_str();
  app->add_option("--out", c.out, "structured JSON output path");
}

void add_input_options(CLI::App* app, agl::RunConfig& c) {
  app->add_option("--input", c.input, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  app->add_option("--response", c.response, "name of the response column")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable selection in sparse additive models with the adaptive group Lasso"};
  app.require_subcommand(1);
  agl::RunConfig config;

  auto* fit = app.add_subcommand("fit", "two-step fit with criterion-tuned penalties");
  add_input_options(fit, config);
  add_model_options(fit, config);
  fit->add_option("--screen-top-k", config.screen_top_k, "keep the k covariates most correlated with y");

  auto* path = app.add_subcommand("path", "trace both penalty paths with criterion values");
  add_input_options(path, config);
  add_model_options(path, config);
  path->add_option("--screen-top-k", config.screen_top_k, "keep the k covariates most correlated with y");

  auto* screen = app.add_subcommand("screen", "rank covariates by absolute marginal correlation");
  add_input_options(screen, config);
  screen->add_option("--screen-top-k", config.screen_top_k, "number of covariates to report (0 = all)");
  screen->add_option("--out", config.out, "structured JSON output path");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validated prediction error");
  add_input_options(cv, config);
  add_model_options(cv, config);
  cv->add_option("--screen-top-k", config.screen_top_k, "keep the k covariates most correlated with y");
  cv->add_option("--folds", config.folds, "number of folds")->capture_default_str();
  config.reps = 400;
  cv->add_option("--reps", config.reps, "number of repeated partitions")->capture_default_str();
  cv->add_option("--seed", config.seed, "partition seed")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study on the built-in generating models");
  add_model_options(sim, config);
  sim->add_option("--example", config.example, "generating model (1 or 2)")->capture_default_str();
  sim->add_option("--n", config.n, "sample size")->capture_default_str();
  sim->add_option("--p", config.p, "number of covariates")->capture_default_str();
  sim->add_option("--t", config.t, "correlation parameter")->capture_default_str();
  sim->add_option("--sigma", config.sigma, "noise sd (0 = the example's default)")->capture_default_str();
  sim->add_option("--methods", config.methods, "subset of AGL GL OLasso LinearLasso")->expected(1, 4);
  sim->add_option("--reps", config.reps, "replications")->capture_default_str();
  sim->add_option("--seed", config.seed, "master seed")->capture_default_str();
  sim->add_option("--data-out", config.data_out, "write the first replication's data as CSV");
  sim->add_option("--response", config.response, "response column name for --data-out")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  config.subcommand = app.get_subcommands().front()->get_name();

  try {
    const agl::CommandOutput result = agl::run_command(config);
    std::cout << result.summary;
    return 0;
  } catch (const agl::Error& e) {
    std::cerr << "agl " << config.subcommand << ": " << agl::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "agl " << config.subcommand << ": " << e.what() << '\n';
    return 1;
  }
}
