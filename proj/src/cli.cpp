#include "agl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "agl/csv.hpp"

namespace agl {

using nlohmann::json;

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::invalid_argument, what);
  };
  require(degree >= 1, "--degree must be >= 1");
  require(knots >= 0, "--knots must be >= 0");
  parse_criterion(criterion);
  require(nu >= 0.0 && nu <= 1.0, "--nu must lie in [0, 1]");
  require(grid_size >= 2, "--grid-size must be >= 2");
  require(grid_ratio > 0.0 && grid_ratio < 1.0, "--grid-ratio must lie in (0, 1)");
  require(screen_top_k >= 0, "--screen-top-k must be >= 0");
  require(folds >= 2, "--folds must be >= 2");
  require(reps >= 1, "--reps must be >= 1");
  require(example == 1 || example == 2, "--example must be 1 or 2");
  require(n >= 10, "--n must be >= 10");
  require(p >= 4, "--p must be >= 4");
  require(t >= 0.0, "--t must be >= 0");
  require(sigma >= 0.0, "--sigma must be >= 0");
  for (const auto& m : methods) parse_method(m);
}

TuningConfig RunConfig::tuning() const {
  TuningConfig c;
  c.basis = make_basis(0.0, 1.0, knots, degree);
  c.criterion = parse_criterion(criterion);
  c.nu = nu;
  c.grid_size = grid_size;
  c.grid_ratio = grid_ratio;
  return c;
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, "invalid JSON in '" + path + "': " + e.what());
  }
}

namespace {

struct LoadedInput {
  Dataset data;
  std::vector<Eigen::Index> columns;  // input covariate position of each kept column
  std::vector<std::string> excluded_constant;
  std::vector<Eigen::Index> screened;
};

LoadedInput load_input(const RunConfig& config, bool allow_screen) {
  if (config.input.empty()) throw Error(ErrorCode::invalid_argument, "--input is required");
  CsvLoad csv = load_csv(config.input, config.response);
  LoadedInput in;
  in.excluded_constant = std::move(csv.excluded_constant);
  in.data = std::move(csv.dataset);
  in.columns = std::move(csv.columns);
  if (allow_screen && config.screen_top_k > 0) {
    const auto top = marginal_screen(in.data.x, in.data.y, std::min<Eigen::Index>(config.screen_top_k, in.data.p()));
    std::vector<Eigen::Index> keep;
    for (const auto& e : top) keep.push_back(e.index);
    std::sort(keep.begin(), keep.end());
    Dataset reduced;
    reduced.y = in.data.y;
    reduced.x.resize(in.data.n(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      reduced.x.col(static_cast<Eigen::Index>(k)) = in.data.x.col(keep[k]);
      reduced.names.push_back(in.data.name(keep[k]));
    }
    in.data = std::move(reduced);
    for (auto& k : keep) k = in.columns[static_cast<std::size_t>(k)];
    in.columns = keep;
    in.screened = keep;
  }
  return in;
}

void maybe_write(const RunConfig& config, const json& doc) {
  if (!config.out.empty()) write_json(doc, config.out);
}

}  // namespace

std::string format_fit(const FitReport& r) {
  std::ostringstream out;
  out << "n=" << r.n << " p=" << r.p << " degree=" << r.degree << " knots=" << r.knots
      << " criterion=" << r.criterion << "\n";
  out << "lambda1=" << r.step1.lambda << " lambda2=" << r.step2.lambda << " rss=" << r.rss << " df=" << r.df
      << " mu_hat=" << r.mu_hat << "\n";
  out << "selected (" << r.selected.size() << "):";
  for (const auto& name : r.selected_names) out << ' ' << name;
  out << "\n";
  for (const auto& c : r.components) {
    if (c.selected) out << "  " << c.name << "  norm=" << c.norm << "\n";
  }
  if (!r.excluded_constant.empty()) {
    out << "excluded constant columns:";
    for (const auto& name : r.excluded_constant) out << ' ' << name;
    out << "\n";
  }
  return out.str();
}

FitReport cmd_fit(const RunConfig& config) {
  config.validate();
  const LoadedInput in = load_input(config, true);
  const TuningConfig tuning = config.tuning();
  const TunedFit tuned = fit_tuned(in.data, tuning);
  FitReport report = make_fit_report(tuned, in.data, tuning, in.columns);
  report.excluded_constant = in.excluded_constant;
  report.screened = in.screened;
  maybe_write(config, to_json(report));
  return report;
}

CommandOutput cmd_path(const RunConfig& config) {
  config.validate();
  const LoadedInput in = load_input(config, true);
  const TuningConfig tuning = config.tuning();
  const TunedFit tuned = fit_tuned(in.data, tuning);
  json doc = {{"kind", "path"},
              {"criterion", config.criterion},
              {"step1", to_json(tuned.step1_path)},
              {"step1_index", tuned.step1_index},
              {"step2", to_json(tuned.step2_path)},
              {"step2_index", tuned.step2_index},
              {"screened", in.screened}};
  std::vector<Eigen::Index> selected;
  for (const Eigen::Index j : tuned.adaptive.selected) selected.push_back(in.columns[static_cast<std::size_t>(j)]);
  doc["selected"] = selected;
  maybe_write(config, doc);

  std::ostringstream s;
  s << "step 1: " << tuned.step1_path.size() << " points, chosen lambda "
    << tuned.step1_path[tuned.step1_index].lambda << " (" << tuned.step1_path[tuned.step1_index].num_selected
    << " groups)\n";
  if (!tuned.step2_path.empty()) {
    s << "step 2: " << tuned.step2_path.size() << " points, chosen lambda "
      << tuned.step2_path[tuned.step2_index].lambda << " (" << tuned.step2_path[tuned.step2_index].num_selected
      << " groups)\n";
  }
  return {std::move(doc), s.str()};
}

CommandOutput cmd_simulate(const RunConfig& config) {
  config.validate();
  GenConfig gen;
  gen.example = config.example;
  gen.n = config.n;
  gen.p = config.p;
  gen.t = config.t;
  gen.sigma = config.sigma;
  gen.seed = config.seed;
  std::vector<Method> methods;
  for (const auto& m : config.methods) methods.push_back(parse_method(m));

  if (!config.data_out.empty()) {
    GenConfig first = gen;
    first.seed = derive_seed(gen.seed, 0);
    write_csv(generate(first).dataset, config.data_out, config.response);
  }

  SimulationOptions opts;
  opts.tuning = config.tuning();
  opts.threads = config.threads;
  const SummaryTable table = run_replications(gen, methods, parse_criterion(config.criterion), config.reps, opts);
  json doc = to_json(table);
  maybe_write(config, doc);
  return {std::move(doc), format_summary(table)};
}

CommandOutput cmd_screen(const RunConfig& config) {
  config.validate();
  const LoadedInput in = load_input(config, false);
  const Eigen::Index top_k = config.screen_top_k > 0 ? config.screen_top_k : in.data.p();
  const auto entries = marginal_screen(in.data.x, in.data.y, top_k);
  json list = json::array();
  std::ostringstream s;
  for (const auto& e : entries) {
    const Eigen::Index index = in.columns[static_cast<std::size_t>(e.index)];
    list.push_back({{"index", index}, {"name", in.data.name(e.index)}, {"correlation", e.correlation}});
    char line[160];
    std::snprintf(line, sizeof line, "%6ld  %-20s % .6f\n", static_cast<long>(index), in.data.name(e.index).c_str(),
                  e.correlation);
    s << line;
  }
  json doc = {{"kind", "screen"}, {"top_k", top_k}, {"entries", list}};
  maybe_write(config, doc);
  return {std::move(doc), s.str()};
}

CommandOutput cmd_cv(const RunConfig& config) {
  config.validate();
  const LoadedInput in = load_input(config, true);
  const auto runs = repeated_cv(in.data, config.folds, config.tuning(), config.seed, config.reps, config.threads);
  json list = json::array();
  double pe = 0.0;
  double selected = 0.0;
  for (const auto& r : runs) {
    list.push_back(to_json(r));
    pe += r.mean_pe;
    selected += r.mean_selected;
  }
  pe /= static_cast<double>(runs.size());
  selected /= static_cast<double>(runs.size());
  json doc = {{"kind", "cv"},           {"folds", config.folds}, {"reps", config.reps},
              {"mean_pe", pe},          {"mean_selected", selected}, {"runs", list},
              {"screened", in.screened}};
  maybe_write(config, doc);
  std::ostringstream s;
  s << config.reps << " x " << config.folds << "-fold CV: mean PE " << pe << ", mean selected " << selected << "\n";
  return {std::move(doc), s.str()};
}

CommandOutput run_command(const RunConfig& config) {
  if (config.subcommand == "fit") {
    FitReport r = cmd_fit(config);
    return {to_json(r), format_fit(r)};
  }
  if (config.subcommand == "path") return cmd_path(config);
  if (config.subcommand == "simulate") return cmd_simulate(config);
  if (config.subcommand == "screen") return cmd_screen(config);
  if (config.subcommand == "cv") return cmd_cv(config);
  throw Error(ErrorCode::invalid_argument, "unknown subcommand '" + config.subcommand + "'");
}

}  // namespace agl
