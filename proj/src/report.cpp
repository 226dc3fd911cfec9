#include "agl/report.hpp"

#include <cstdio>
#include <sstream>

namespace agl {

using nlohmann::json;

namespace {

StepReport step_report(const CriterionValue* cv, const FitDiagnostics& d, double lambda) {
  StepReport s;
  s.lambda = lambda;
  if (cv != nullptr && !cv->degenerate) {
    s.bic = cv->bic;
    s.ebic = cv->ebic;
  }
  s.sweeps = d.sweeps;
  s.kkt_residual = d.kkt_residual;
  s.converged = d.converged;
  return s;
}

json step_json(const StepReport& s) {
  return {{"lambda", s.lambda},   {"bic", s.bic},
          {"ebic", s.ebic},       {"sweeps", s.sweeps},
          {"kkt_residual", s.kkt_residual}, {"converged", s.converged}};
}

StepReport step_from(const json& j) {
  StepReport s;
  s.lambda = j.at("lambda").get<double>();
  s.bic = j.at("bic").get<double>();
  s.ebic = j.at("ebic").get<double>();
  s.sweeps = j.at("sweeps").get<int>();
  s.kkt_residual = j.at("kkt_residual").get<double>();
  s.converged = j.at("converged").get<bool>();
  return s;
}

}  // namespace

FitReport make_fit_report(const TunedFit& tuned, const Dataset& data, const TuningConfig& config,
                          const std::vector<Eigen::Index>& columns) {
  const ModelFit& fit = tuned.adaptive;
  FitReport r;
  r.n = data.n();
  r.p = data.p();
  r.degree = config.basis.knots.degree();
  r.knots = config.basis.knots.num_interior();
  r.criterion = to_string(config.criterion);
  r.nu = config.nu;
  r.mu_hat = fit.mu_hat;
  r.rss = fit.rss;
  r.df = fit.df;
  r.step1 = step_report(tuned.step1_path.empty() ? nullptr : &tuned.step1_path[tuned.step1_index], fit.step1,
                        fit.lambda1);
  r.step2 = step_report(tuned.step2_path.empty() ? nullptr : &tuned.step2_path[tuned.step2_index], fit.step2,
                        fit.lambda2);
  for (const Eigen::Index j : fit.selected) {
    r.selected.push_back(columns[static_cast<std::size_t>(j)]);
    r.selected_names.push_back(data.name(j));
  }
  for (Eigen::Index j = 0; j < fit.num_covariates(); ++j) {
    const auto& c = fit.components[static_cast<std::size_t>(j)];
    ComponentReport cr;
    cr.index = columns[static_cast<std::size_t>(j)];
    cr.name = data.name(j);
    cr.selected = fit.is_selected(j);
    cr.coefficients.assign(c.coefficients.data(), c.coefficients.data() + c.coefficients.size());
    cr.norm = c.norm;
    Eigen::VectorXd grid(kCurveGridSize);
    for (int g = 0; g < kCurveGridSize; ++g) {
      grid(g) = fit.scale.inverse(j, static_cast<double>(g) / (kCurveGridSize - 1));
    }
    const Eigen::VectorXd f = predict_component(fit, j, grid, OutOfRange::clamp);
    cr.grid_x.assign(grid.data(), grid.data() + grid.size());
    cr.grid_f.assign(f.data(), f.data() + f.size());
    r.components.push_back(std::move(cr));
  }
  return r;
}

json to_json(const FitReport& r) {
  json comps = json::array();
  for (const auto& c : r.components) {
    comps.push_back({{"index", c.index},
                     {"name", c.name},
                     {"selected", c.selected},
                     {"coefficients", c.coefficients},
                     {"norm", c.norm},
                     {"grid_x", c.grid_x},
                     {"grid_f", c.grid_f}});
  }
  return {{"kind", "fit"},
          {"n", r.n},
          {"p", r.p},
          {"degree", r.degree},
          {"knots", r.knots},
          {"criterion", r.criterion},
          {"nu", r.nu},
          {"mu_hat", r.mu_hat},
          {"rss", r.rss},
          {"df", r.df},
          {"step1", step_json(r.step1)},
          {"step2", step_json(r.step2)},
          {"selected", r.selected},
          {"selected_names", r.selected_names},
          {"excluded_constant", r.excluded_constant},
          {"screened", r.screened},
          {"components", comps}};
}

FitReport fit_report_from_json(const json& j) {
  FitReport r;
  r.n = j.at("n").get<Eigen::Index>();
  r.p = j.at("p").get<Eigen::Index>();
  r.degree = j.at("degree").get<int>();
  r.knots = j.at("knots").get<int>();
  r.criterion = j.at("criterion").get<std::string>();
  r.nu = j.at("nu").get<double>();
  r.mu_hat = j.at("mu_hat").get<double>();
  r.rss = j.at("rss").get<double>();
  r.df = j.at("df").get<double>();
  r.step1 = step_from(j.at("step1"));
  r.step2 = step_from(j.at("step2"));
  r.selected = j.at("selected").get<std::vector<Eigen::Index>>();
  r.selected_names = j.at("selected_names").get<std::vector<std::string>>();
  r.excluded_constant = j.at("excluded_constant").get<std::vector<std::string>>();
  r.screened = j.at("screened").get<std::vector<Eigen::Index>>();
  for (const auto& c : j.at("components")) {
    ComponentReport cr;
    cr.index = c.at("index").get<Eigen::Index>();
    cr.name = c.at("name").get<std::string>();
    cr.selected = c.at("selected").get<bool>();
    cr.coefficients = c.at("coefficients").get<std::vector<double>>();
    cr.norm = c.at("norm").get<double>();
    cr.grid_x = c.at("grid_x").get<std::vector<double>>();
    cr.grid_f = c.at("grid_f").get<std::vector<double>>();
    r.components.push_back(std::move(cr));
  }
  return r;
}

json to_json(const SummaryTable& t) {
  json rows = json::array();
  for (const auto& s : t.rows) {
    rows.push_back({{"method", to_string(s.method)},
                    {"NV", s.nv_mean},
                    {"NV_se", s.nv_se},
                    {"ME", s.me_mean},
                    {"ME_se", s.me_se},
                    {"IN", s.in_pct},
                    {"IN_se", s.in_se},
                    {"CS", s.cs_pct},
                    {"CS_se", s.cs_se},
                    {"component_error", s.component_error_mean},
                    {"succeeded", s.succeeded},
                    {"failed", s.failed}});
  }
  return {{"kind", "simulate"},
          {"example", t.config.example},
          {"n", t.config.n},
          {"p", t.config.p},
          {"t", t.config.t},
          {"sigma", t.config.noise_sd()},
          {"seed", t.config.seed},
          {"criterion", to_string(t.criterion)},
          {"reps", t.reps},
          {"methods", rows}};
}

json to_json(const CvResult& r) {
  return {{"folds", r.folds},
          {"per_fold_pe", r.per_fold_pe},
          {"per_fold_selected", r.per_fold_selected},
          {"fold_sizes",
           [&] {
             std::vector<std::size_t> sizes;
             for (const auto& f : r.fold_indices) sizes.push_back(f.size());
             return sizes;
           }()},
          {"mean_pe", r.mean_pe},
          {"mean_selected", r.mean_selected}};
}

json to_json(const std::vector<CriterionValue>& path) {
  json out = json::array();
  for (const auto& c : path) {
    json e = {{"lambda", c.lambda}, {"rss", c.rss}, {"df", c.df}, {"num_selected", c.num_selected},
              {"degenerate", c.degenerate}};
    e["bic"] = c.degenerate ? json(nullptr) : json(c.bic);
    e["ebic"] = c.degenerate ? json(nullptr) : json(c.ebic);
    out.push_back(e);
  }
  return out;
}

std::string format_summary(const SummaryTable& t) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "Example %d  n=%ld  p=%ld  t=%g  sigma=%g  criterion=%s  reps=%d\n",
                t.config.example, static_cast<long>(t.config.n), static_cast<long>(t.config.p), t.config.t,
                t.config.noise_sd(), to_string(t.criterion), t.reps);
  out << line;
  std::snprintf(line, sizeof line, "%-12s %16s %16s %16s %16s %7s\n", "method", "NV", "ME", "IN", "CS", "failed");
  out << line;
  for (const auto& s : t.rows) {
    auto cell = [](double m, double se) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f (%.2f)", m, se);
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "%-12s %16s %16s %16s %16s %7d\n", to_string(s.method),
                  cell(s.nv_mean, s.nv_se).c_str(), cell(s.me_mean, s.me_se).c_str(), cell(s.in_pct, s.in_se).c_str(),
                  cell(s.cs_pct, s.cs_se).c_str(), s.failed);
    out << line;
  }
  return out.str();
}

}  // namespace agl
