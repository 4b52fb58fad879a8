#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfd/dataset.hpp"
#include "sfd/differencing.hpp"
#include "sfd/errors.hpp"
#include "sfd/estimation.hpp"
#include "sfd/io.hpp"
#include "sfd/ordering.hpp"
#include "sfd/robustness.hpp"
#include "sfd/simulation.hpp"

namespace {

using sfd::Json;

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kFig5PresetSeed = 1234567;

// Command-line level mistakes (bad flag values, conflicting flags); exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("SFD_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double_or_usage(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + text + "'");
  }
}

long long parse_int_or_usage(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + text + "'");
  }
}

// ---- input plumbing ----

struct InputOptions {
  std::string input;
  std::string id_column = "id";
  std::string x_column = "x";
  std::string y_column = "y";
  std::string outcome_column = "outcome";
  std::string regressors;
  std::string polygons;
  std::vector<std::string> transforms;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--input", in.input, "input CSV with one row per unit")->required();
  cmd->add_option("--id-column", in.id_column, "unit id column (default id)");
  cmd->add_option("--x-column", in.x_column, "east-west coordinate column (default x)");
  cmd->add_option("--y-column", in.y_column, "north-south coordinate column (default y)");
  cmd->add_option("--outcome", in.outcome_column, "outcome column (default outcome)");
  cmd->add_option("--regressors", in.regressors,
                  "comma-separated regressor columns (default: all non-role columns)");
  cmd->add_option("--polygons", in.polygons,
                  "optional polygon CSV with columns id,vertex_index,x,y");
  cmd->add_option("--transform", in.transforms,
                  "derived column: polynomial:COL:DEGREE:OUT, "
                  "degree-days:PREFIX:THRESHOLD:OUT, or spatial-lag:COL:OFFSET:OUT "
                  "(repeatable, applied in order)");
}

Json input_to_json(const InputOptions& in) {
  Json j;
  j["path"] = in.input;
  j["id_column"] = in.id_column;
  j["x_column"] = in.x_column;
  j["y_column"] = in.y_column;
  j["outcome_column"] = in.outcome_column;
  Json regs = Json::array();
  for (const auto& r : split_list(in.regressors, ','))
    if (!r.empty()) regs.push_back(r);
  j["regressors"] = std::move(regs);
  j["polygons"] = in.polygons;
  j["transforms"] = in.transforms;
  return j;
}

sfd::TransformSpec parse_transform(const std::string& text) {
  const auto parts = split_list(text, ':');
  if (parts.size() != 4) {
    throw UsageError("transform must have 4 fields, e.g. polynomial:temp:2:temp_sq; got '" +
                     text + "'");
  }
  sfd::TransformSpec spec;
  if (parts[0] == "polynomial") {
    spec.kind = sfd::TransformSpec::Kind::polynomial;
    spec.column = parts[1];
    spec.degree = static_cast<int>(parse_int_or_usage(parts[2], "polynomial degree"));
  } else if (parts[0] == "degree-days") {
    spec.kind = sfd::TransformSpec::Kind::degree_days;
    spec.column = parts[1];
    spec.threshold = parse_double_or_usage(parts[2], "degree-day threshold");
  } else if (parts[0] == "spatial-lag") {
    spec.kind = sfd::TransformSpec::Kind::spatial_lag;
    spec.column = parts[1];
    spec.offset = static_cast<int>(parse_int_or_usage(parts[2], "spatial-lag offset"));
  } else {
    throw UsageError("unknown transform '" + parts[0] +
                     "'; expected polynomial, degree-days, or spatial-lag");
  }
  spec.output = parts[3];
  if (spec.output.empty()) throw UsageError("transform output name is empty in '" + text + "'");
  return spec;
}

sfd::SpatialDataset load_input(const Json& input) {
  sfd::CsvSchema schema;
  schema.id = input.at("id_column").get<std::string>();
  schema.x = input.at("x_column").get<std::string>();
  schema.y = input.at("y_column").get<std::string>();
  schema.outcome = input.at("outcome_column").get<std::string>();
  schema.regressors = input.at("regressors").get<std::vector<std::string>>();
  sfd::SpatialDataset ds = sfd::load_csv(input.at("path").get<std::string>(), schema);
  const auto polygons = input.at("polygons").get<std::string>();
  if (!polygons.empty()) ds = sfd::load_polygons(std::move(ds), polygons);
  return ds;
}

// ---- ordering plumbing ----

struct OrderingOptions {
  std::string order_1d;
  std::string grid;
  double width = 0.0;
  double theta = 0.0;
  CLI::Option* width_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
};

void add_ordering_options(CLI::App* cmd, OrderingOptions& o) {
  cmd->add_option("--order-1d", o.order_1d, "order along one coordinate: x or y")
      ->check(CLI::IsMember({"x", "y"}));
  cmd->add_option("--grid", o.grid, "lattice traversal: we (west-east) or ns (north-south)")
      ->check(CLI::IsMember({"we", "ns"}));
  o.width_opt = cmd->add_option("--width", o.width, "band width for channel assignment");
  o.theta_opt = cmd->add_option("--theta", o.theta,
                                "band rotation in degrees (with --width; default 0)");
}

Json ordering_to_json(const OrderingOptions& o) {
  const bool has_width = o.width_opt != nullptr && o.width_opt->count() > 0;
  const bool has_theta = o.theta_opt != nullptr && o.theta_opt->count() > 0;
  const int chosen = (o.order_1d.empty() ? 0 : 1) + (o.grid.empty() ? 0 : 1) + (has_width ? 1 : 0);
  if (chosen == 0) {
    throw UsageError("choose an ordering: --order-1d, --grid, or --width [--theta]");
  }
  if (chosen > 1) {
    if (!o.order_1d.empty() && !o.grid.empty())
      throw UsageError("--order-1d conflicts with --grid");
    if (!o.order_1d.empty()) throw UsageError("--order-1d conflicts with --width");
    throw UsageError("--grid conflicts with --width");
  }
  if (has_theta && !has_width) throw UsageError("--theta requires --width");
  Json j;
  if (!o.order_1d.empty()) {
    j["mode"] = "1d";
    j["axis"] = o.order_1d;
  } else if (!o.grid.empty()) {
    j["mode"] = "grid";
    j["direction"] = o.grid;
  } else {
    if (o.width <= 0.0) throw UsageError("--width must be positive");
    j["mode"] = "channels";
    j["width"] = o.width;
    j["theta"] = o.theta;
  }
  return j;
}

sfd::OrderedPath build_path(const sfd::SpatialDataset& ds, const Json& ordering) {
  const auto mode = ordering.at("mode").get<std::string>();
  if (mode == "1d") {
    return sfd::order_1d(ds, ordering.at("axis").get<std::string>().at(0));
  }
  if (mode == "grid") {
    const auto dir = ordering.at("direction").get<std::string>();
    return sfd::order_grid(ds, dir == "we" ? sfd::GridDirection::west_east
                                           : sfd::GridDirection::north_south);
  }
  if (mode == "channels") {
    return sfd::assign_channels(ds, ordering.at("width").get<double>(),
                                ordering.at("theta").get<double>());
  }
  throw sfd::DomainError("unknown ordering mode '" + mode + "'");
}

// Loads, orders, applies transforms, and reorders the surviving units.
std::pair<sfd::SpatialDataset, sfd::OrderedPath> load_and_order(const Json& cfg) {
  sfd::SpatialDataset ds = load_input(cfg.at("input"));
  const Json& ordering = cfg.at("ordering");
  sfd::OrderedPath path = build_path(ds, ordering);
  const auto transform_texts = cfg.at("input").at("transforms").get<std::vector<std::string>>();
  if (!transform_texts.empty()) {
    std::vector<sfd::TransformSpec> specs;
    specs.reserve(transform_texts.size());
    for (const auto& t : transform_texts) specs.push_back(parse_transform(t));
    ds = sfd::apply_transforms(ds, path, specs);
    path = build_path(ds, ordering);
  }
  return {std::move(ds), std::move(path)};
}

// ---- DGP plumbing ----

struct DgpOptions {
  std::string dgp = "sinusoid";
  long long n = 1000;
  double beta = 1.0;
  double alpha = 1.0;
  double sigma_eps = 1.0;
  double lambda = 360.0;
  double phi = 0.5;
  std::string scenario = "a";
  double gamma = 0.5;
  int lag = 1;
  std::uint64_t seed = 0;
  CLI::Option* dgp_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* phi_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_dgp_options(CLI::App* cmd, DgpOptions& d) {
  d.dgp_opt = cmd->add_option("--dgp", d.dgp,
                              "data-generating process: sinusoid, common-cause, spillover, "
                              "or smooth-trend")
                  ->check(CLI::IsMember({"sinusoid", "common-cause", "spillover", "smooth-trend"}));
  d.n_opt = cmd->add_option("--n", d.n, "number of units (default 1000)");
  cmd->add_option("--beta", d.beta, "slope on x (default 1)");
  cmd->add_option("--alpha", d.alpha, "loading on the confounder (default 1)");
  d.sigma_opt = cmd->add_option("--sigma-eps", d.sigma_eps,
                                "noise sd (default 1; 0.01 for common-cause)");
  d.lambda_opt =
      cmd->add_option("--lambda", d.lambda, "confounder wavelength in degrees (sinusoid)");
  d.phi_opt = cmd->add_option("--phi", d.phi, "regressor/confounder noise scale (sinusoid)");
  cmd->add_option("--scenario", d.scenario, "common-cause panel: a, b, or c")
      ->check(CLI::IsMember({"a", "b", "c"}));
  cmd->add_option("--gamma", d.gamma, "spillover strength (default 0.5)");
  cmd->add_option("--lag", d.lag, "spillover distance in units (default 1)");
  d.seed_opt = cmd->add_option("--seed", d.seed, "master seed (default 0)");
}

Json dgp_to_json(const DgpOptions& d) {
  sfd::DGPConfig c;
  c.kind = sfd::dgp_kind_from_string(d.dgp);
  c.n = static_cast<sfd::Index>(d.n);
  c.beta = d.beta;
  c.alpha = d.alpha;
  const bool sigma_given = d.sigma_opt != nullptr && d.sigma_opt->count() > 0;
  c.sigma_eps = sigma_given ? d.sigma_eps
                            : (c.kind == sfd::DGPConfig::Kind::common_cause ? 0.01 : 1.0);
  c.lambda = d.lambda;
  c.phi = d.phi;
  c.scenario = d.scenario.at(0);
  c.gamma = d.gamma;
  c.lag = d.lag;
  c.seed = d.seed;
  try {
    c.validate();
  } catch (const sfd::Error& ex) {
    throw UsageError(ex.what());
  }
  return sfd::to_json(c);
}

// ---- shared validation wrappers ----

sfd::SEMethod parse_se_or_usage(const std::string& text) {
  try {
    return sfd::SEMethod::parse(text);
  } catch (const sfd::Error& ex) {
    throw UsageError(ex.what());
  }
}

sfd::EstimatorKind parse_kind_or_usage(const std::string& text) {
  try {
    return sfd::estimator_kind_from_string(text);
  } catch (const sfd::Error& ex) {
    throw UsageError(ex.what());
  }
}

Json columns_json(const std::string& csv_list) {
  Json cols = Json::array();
  for (const auto& c : split_list(csv_list, ','))
    if (!c.empty()) cols.push_back(c);
  return cols;
}

std::string artifact_path(const std::string& out_dir, const std::string& name) {
  return out_dir + "/" + name;
}

void write_config(const Json& cfg, const std::string& out_dir) {
  sfd::write_json_atomic(artifact_path(out_dir, "config.json"), cfg);
}

// ---- command runners (shared by direct invocation and rerun) ----

void run_fit(const Json& cfg, const std::string& out_dir) {
  auto [ds, path] = load_and_order(cfg);
  const auto kind = sfd::estimator_kind_from_string(cfg.at("kind").get<std::string>());
  const auto columns = cfg.at("columns").get<std::vector<std::string>>();
  sfd::FitResult r;
  if (kind == sfd::EstimatorKind::robinson) {
    r = sfd::robinson_fit(ds, path, cfg.at("bandwidth").get<int>(), columns);
  } else {
    const sfd::SEMethod se = sfd::SEMethod::parse(cfg.at("se").get<std::string>());
    const sfd::DifferencedDesign d =
        kind == sfd::EstimatorKind::levels ? sfd::levels_design(ds, path)
        : kind == sfd::EstimatorKind::sfd  ? sfd::spatial_first_difference(ds, path)
                                           : sfd::spatial_double_difference(ds, path);
    r = sfd::fit_design(d, se, columns);
    if (cfg.at("emit_design").get<bool>()) {
      sfd::write_text_atomic(artifact_path(out_dir, "design.csv"), sfd::design_csv(d));
    }
  }
  Json out = sfd::to_json(r);
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  sfd::write_json_atomic(artifact_path(out_dir, "fit.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "fit.csv"), sfd::fit_csv(r));
  write_config(cfg, out_dir);
  std::cout << sfd::coefficient_table(r);
}

void run_simulate(const Json& cfg, const std::string& out_dir) {
  const sfd::DGPConfig c = sfd::dgp_config_from_json(cfg.at("dgp"));
  const sfd::SimulatedDataset sim = sfd::simulate(c);
  sfd::write_text_atomic(artifact_path(out_dir, "dataset.csv"), sfd::simulated_csv(sim));
  Json truth;
  truth["schema"] = "sfd.simulated/1";
  truth["config"] = cfg;
  truth["seed"] = c.seed;
  Json tj = Json::object();
  for (const auto& [name, value] : sim.truth) tj[name] = value;
  truth["truth"] = std::move(tj);
  truth["alpha"] = c.alpha;
  truth["scenario_formula"] = sim.scenario_formula;
  truth["construction_gap_max"] = sim.construction_gap().cwiseAbs().maxCoeff();
  sfd::write_json_atomic(artifact_path(out_dir, "truth.json"), truth);
  write_config(cfg, out_dir);
  std::cout << "simulated " << sim.data.n_units() << " units (dgp = " << to_string(c.kind)
            << ", seed = " << c.seed << ") -> " << artifact_path(out_dir, "dataset.csv")
            << "\n";
}

void run_monte_carlo(const Json& cfg, const std::string& out_dir) {
  const sfd::DGPConfig c = sfd::dgp_config_from_json(cfg.at("dgp"));
  const int reps = cfg.at("reps").get<int>();
  const int bandwidth = cfg.at("bandwidth").get<int>();
  std::vector<sfd::EstimatorSpec> specs;
  for (const auto& name : cfg.at("estimators").get<std::vector<std::string>>()) {
    sfd::EstimatorSpec spec;
    spec.kind = sfd::estimator_kind_from_string(name);
    spec.bandwidth = bandwidth;
    spec.label = name;
    specs.push_back(std::move(spec));
  }
  const sfd::MonteCarloReport report = sfd::monte_carlo(c, specs, reps);
  Json out = sfd::to_json(report);
  out["config"] = cfg;
  out["seed"] = c.seed;
  sfd::write_json_atomic(artifact_path(out_dir, "report.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "draws.csv"), sfd::monte_carlo_csv(report));
  write_config(cfg, out_dir);
  std::cout << sfd::monte_carlo_table(report);
}

void run_channels(const Json& cfg, const std::string& out_dir) {
  sfd::SpatialDataset ds = load_input(cfg.at("input"));
  const double width = cfg.at("width").is_null() ? sfd::default_channel_width(ds)
                                                 : cfg.at("width").get<double>();
  const double theta = cfg.at("theta").get<double>();
  const sfd::OrderedPath path = sfd::assign_channels(ds, width, theta);
  Json out;
  out["schema"] = "sfd.channels/1";
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  out["width"] = width;
  out["theta"] = theta;
  out["direction"] = path.direction;
  out["n_channels"] = path.channels.size();
  out["n_units"] = path.unit_count();
  Json sizes = Json::array();
  for (const auto& ch : path.channels) sizes.push_back(ch.size());
  out["channel_sizes"] = std::move(sizes);
  sfd::write_json_atomic(artifact_path(out_dir, "channels.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "path.csv"), sfd::path_csv(path));
  write_config(cfg, out_dir);
  std::cout << "assigned " << path.unit_count() << " units to " << path.channels.size()
            << " channels (width = " << width << ", theta = " << theta << ")\n";
}

void run_rotate_sweep(const Json& cfg, const std::string& out_dir) {
  sfd::SpatialDataset ds = load_input(cfg.at("input"));
  const double width = cfg.at("width").get<double>();
  const auto thetas = cfg.at("thetas").get<std::vector<double>>();
  const sfd::SEMethod se = sfd::SEMethod::parse(cfg.at("se").get<std::string>());
  const auto columns = cfg.at("columns").get<std::vector<std::string>>();
  const sfd::SweepResult sweep = sfd::rotation_sweep(ds, width, thetas, se, columns);
  Json out = sfd::to_json(sweep);
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  sfd::write_json_atomic(artifact_path(out_dir, "sweep.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "sweep.csv"), sfd::sweep_csv(sweep));
  write_config(cfg, out_dir);
  int failed = 0;
  for (const auto& e : sweep.entries)
    if (!e.ok) ++failed;
  std::cout << "rotation sweep over " << sweep.entries.size() << " angles (" << failed
            << " failed)\n";
  for (const auto& d : sweep.dispersion) {
    std::cout << d.coef << ": mean = " << d.mean << ", sd = " << d.sd
              << ", cov = " << (d.cov_guarded ? std::string("n/a (mean near zero)")
                                              : std::to_string(d.cov))
              << "\n";
  }
}

void run_extreme_bounds(const Json& cfg, const std::string& out_dir) {
  auto [ds, path] = load_and_order(cfg);
  sfd::CovariateGroup focal;
  focal.name = cfg.at("focal").at("name").get<std::string>();
  focal.members = cfg.at("focal").at("members").get<std::vector<std::string>>();
  std::vector<sfd::CovariateGroup> controls;
  for (const auto& g : cfg.at("controls")) {
    sfd::CovariateGroup group;
    group.name = g.at("name").get<std::string>();
    group.members = g.at("members").get<std::vector<std::string>>();
    controls.push_back(std::move(group));
  }
  std::vector<sfd::EstimatorKind> kinds;
  for (const auto& k : cfg.at("kinds").get<std::vector<std::string>>()) {
    kinds.push_back(sfd::estimator_kind_from_string(k));
  }
  const sfd::SEMethod se = sfd::SEMethod::parse(cfg.at("se").get<std::string>());
  const sfd::SweepResult sweep = sfd::extreme_bounds(ds, path, focal, controls, kinds, se);
  Json out = sfd::to_json(sweep);
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  sfd::write_json_atomic(artifact_path(out_dir, "bounds.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "bounds.csv"), sfd::sweep_csv(sweep));
  write_config(cfg, out_dir);
  for (const auto& f : sweep.focal) {
    std::cout << f.kind_label << ": " << f.coef << " over " << f.count
              << " specs: min = " << f.min << ", median = " << f.median << ", max = " << f.max
              << ", variance = " << f.variance << "\n";
  }
}

void run_sdd_check(const Json& cfg, const std::string& out_dir) {
  auto [ds, path] = load_and_order(cfg);
  const sfd::SEMethod se = sfd::SEMethod::parse(cfg.at("se").get<std::string>());
  const auto columns = cfg.at("columns").get<std::vector<std::string>>();
  const sfd::SddCheckResult r = sfd::sdd_check(ds, path, se, columns);
  Json out = sfd::to_json(r);
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  sfd::write_json_atomic(artifact_path(out_dir, "sdd.json"), out);
  write_config(cfg, out_dir);
  std::cout << sfd::sdd_table(r);
}

void run_se_table(const Json& cfg, const std::string& out_dir) {
  auto [ds, path] = load_and_order(cfg);
  const auto kind = sfd::estimator_kind_from_string(cfg.at("kind").get<std::string>());
  const auto columns = cfg.at("columns").get<std::vector<std::string>>();
  const sfd::DifferencedDesign d =
      kind == sfd::EstimatorKind::levels ? sfd::levels_design(ds, path)
      : kind == sfd::EstimatorKind::sfd  ? sfd::spatial_first_difference(ds, path)
                                         : sfd::spatial_double_difference(ds, path);
  std::vector<std::pair<std::string, sfd::FitResult>> fits;
  for (const auto& m : cfg.at("methods").get<std::vector<std::string>>()) {
    const sfd::SEMethod se = sfd::SEMethod::parse(m);
    fits.emplace_back(se.label(), sfd::fit_design(d, se, columns));
  }
  Json out = sfd::se_table_json(fits);
  out["config"] = cfg;
  out["seed"] = cfg.at("seed");
  sfd::write_json_atomic(artifact_path(out_dir, "se_table.json"), out);
  sfd::write_text_atomic(artifact_path(out_dir, "se_table.csv"), sfd::se_table_csv(fits));
  write_config(cfg, out_dir);
  std::cout << sfd::se_table_text(fits);
}

using Runner = void (*)(const Json&, const std::string&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"fit", run_fit},
      {"simulate", run_simulate},
      {"monte-carlo", run_monte_carlo},
      {"channels", run_channels},
      {"rotate-sweep", run_rotate_sweep},
      {"extreme-bounds", run_extreme_bounds},
      {"sdd-check", run_sdd_check},
      {"se-table", run_se_table},
  };
  return table;
}

void dispatch(const Json& cfg, const std::string& out_dir) {
  const auto command = cfg.at("command").get<std::string>();
  const auto it = runners().find(command);
  if (it == runners().end()) {
    throw UsageError("config names unknown command '" + command + "'");
  }
  it->second(cfg, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial first differences: ordering, differencing, estimation, inference"};
  app.require_subcommand(1);
  // let --out appear after the subcommand as well as before it
  app.fallthrough();
  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir,
                 "output directory for artifacts (default: $SFD_OUT_DIR or .)");

  // fit
  auto* fit = app.add_subcommand("fit", "estimate a regression on a CSV dataset");
  InputOptions fit_in;
  OrderingOptions fit_ord;
  std::string fit_kind = "sfd";
  std::string fit_se = "newey-west:2";
  std::string fit_columns;
  int fit_bandwidth = 2;
  bool fit_emit_design = false;
  add_input_options(fit, fit_in);
  add_ordering_options(fit, fit_ord);
  fit->add_option("--kind", fit_kind, "estimator: levels, sfd, sdd, or robinson (default sfd)")
      ->check(CLI::IsMember({"levels", "sfd", "sdd", "robinson"}));
  auto* fit_se_opt = fit->add_option(
      "--se", fit_se,
      "standard errors: ols, hc, newey-west[:L], conley:CX,CY, cluster, bootstrap[:B[:SEED]], "
      "block-bootstrap[:B[:SEED]] (default newey-west:2)");
  fit->add_option("--columns", fit_columns, "regressor subset, comma separated (default all)");
  auto* fit_bw_opt =
      fit->add_option("--bandwidth", fit_bandwidth, "robinson window half-width (default 2)");
  fit->add_flag("--emit-design", fit_emit_design, "also write the differenced design CSV");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw one synthetic dataset");
  DgpOptions sim_dgp;
  add_dgp_options(simulate, sim_dgp);

  // monte-carlo
  auto* mc = app.add_subcommand("monte-carlo", "repeated simulation and estimation");
  DgpOptions mc_dgp;
  add_dgp_options(mc, mc_dgp);
  int mc_reps = 1000;
  std::string mc_estimators = "levels,sfd";
  int mc_bandwidth = 2;
  std::string mc_preset;
  mc->add_option("--reps", mc_reps, "repetitions (default 1000)");
  mc->add_option("--estimators", mc_estimators,
                 "comma-separated estimator kinds (default levels,sfd)");
  mc->add_option("--bandwidth", mc_bandwidth, "robinson window half-width (default 2)");
  auto* mc_preset_opt =
      mc->add_option("--preset", mc_preset, "named parameterization: fig5-point")
          ->check(CLI::IsMember({"fig5-point"}));

  // channels
  auto* channels = app.add_subcommand("channels", "assign units to sampling channels");
  InputOptions ch_in;
  double ch_width = 0.0;
  double ch_theta = 0.0;
  add_input_options(channels, ch_in);
  auto* ch_width_opt = channels->add_option(
      "--width", ch_width, "band width (default: mean north-south polygon extent)");
  channels->add_option("--theta", ch_theta, "rotation in degrees (default 0)");

  // rotate-sweep
  auto* rotate = app.add_subcommand("rotate-sweep", "first-difference fit at many rotations");
  InputOptions rot_in;
  double rot_width = 0.0;
  std::string rot_thetas;
  std::string rot_grid = "coarse";
  std::string rot_se = "newey-west:2";
  std::string rot_columns;
  add_input_options(rotate, rot_in);
  rotate->add_option("--width", rot_width, "band width")->required();
  auto* rot_thetas_opt = rotate->add_option(
      "--thetas", rot_thetas, "comma-separated angles in degrees within [-89, 90]");
  auto* rot_grid_opt =
      rotate->add_option("--grid-preset", rot_grid,
                         "coarse ({-60,-30,0,30,60,90}) or full (-89..90 by 1; default coarse)")
          ->check(CLI::IsMember({"coarse", "full"}));
  rotate->add_option("--se", rot_se, "standard-error method (default newey-west:2)");
  rotate->add_option("--columns", rot_columns, "regressor subset, comma separated");

  // extreme-bounds
  auto* bounds = app.add_subcommand("extreme-bounds",
                                    "focal coefficient across all control subsets");
  InputOptions eb_in;
  OrderingOptions eb_ord;
  std::string eb_focal;
  std::vector<std::string> eb_controls;
  std::string eb_kinds = "levels,sfd";
  std::string eb_se = "hc";
  add_input_options(bounds, eb_in);
  add_ordering_options(bounds, eb_ord);
  bounds->add_option("--focal", eb_focal, "focal group, NAME=COL[+COL...]")->required();
  bounds->add_option("--control", eb_controls,
                     "control group, NAME=COL[+COL...] (repeatable)");
  bounds->add_option("--kinds", eb_kinds,
                     "estimator kinds to sweep, comma separated (default levels,sfd)");
  bounds->add_option("--se", eb_se, "standard-error method (default hc)");

  // sdd-check
  auto* sdd = app.add_subcommand("sdd-check", "compare first and double differences");
  InputOptions sdd_in;
  OrderingOptions sdd_ord;
  std::string sdd_se = "newey-west:2";
  std::string sdd_columns;
  add_input_options(sdd, sdd_in);
  add_ordering_options(sdd, sdd_ord);
  sdd->add_option("--se", sdd_se, "standard-error method (default newey-west:2)");
  sdd->add_option("--columns", sdd_columns, "regressor subset, comma separated");

  // se-table
  auto* setab = app.add_subcommand("se-table", "one fit, several standard errors side by side");
  InputOptions st_in;
  OrderingOptions st_ord;
  std::string st_kind = "sfd";
  std::string st_methods = "ols;hc;newey-west:2";
  std::string st_columns;
  add_input_options(setab, st_in);
  add_ordering_options(setab, st_ord);
  setab->add_option("--kind", st_kind, "estimator: levels, sfd, or sdd (default sfd)")
      ->check(CLI::IsMember({"levels", "sfd", "sdd"}));
  setab->add_option("--methods", st_methods,
                    "semicolon-separated methods, e.g. ols;hc;newey-west:2;conley:1.5,1.5");
  setab->add_option("--columns", st_columns, "regressor subset, comma separated");

  // rerun
  auto* rerun = app.add_subcommand("rerun", "re-execute an emitted config.json");
  std::string rerun_config;
  rerun->add_option("--config", rerun_config, "config.json written by a previous run")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Json cfg;
    if (app.got_subcommand(fit)) {
      const auto kind = parse_kind_or_usage(fit_kind);
      if (kind == sfd::EstimatorKind::robinson && fit_se_opt->count() > 0) {
        throw UsageError("--se conflicts with --kind robinson (its covariance is classical)");
      }
      if (kind != sfd::EstimatorKind::robinson && fit_bw_opt->count() > 0) {
        throw UsageError("--bandwidth conflicts with --kind " + fit_kind +
                         " (it applies to robinson)");
      }
      const sfd::SEMethod se = parse_se_or_usage(fit_se);
      for (const auto& t : fit_in.transforms) parse_transform(t);
      cfg["command"] = "fit";
      cfg["input"] = input_to_json(fit_in);
      cfg["ordering"] = ordering_to_json(fit_ord);
      cfg["kind"] = fit_kind;
      cfg["se"] = fit_se;
      cfg["columns"] = columns_json(fit_columns);
      cfg["bandwidth"] = fit_bandwidth;
      cfg["emit_design"] = fit_emit_design;
      cfg["seed"] = se.seed;
    } else if (app.got_subcommand(simulate)) {
      cfg["command"] = "simulate";
      cfg["dgp"] = dgp_to_json(sim_dgp);
      cfg["seed"] = sim_dgp.seed;
    } else if (app.got_subcommand(mc)) {
      if (mc_preset_opt->count() > 0) {
        if (mc_dgp.dgp_opt->count() > 0) {
          throw UsageError("--preset conflicts with --dgp");
        }
        // fig5-point: the sinusoid parameterization behind the headline
        // mean/interval numbers; explicit flags still win
        mc_dgp.dgp = "sinusoid";
        if (mc_dgp.n_opt->count() == 0) mc_dgp.n = 1000;
        if (mc_dgp.lambda_opt->count() == 0) mc_dgp.lambda = 360.0;
        if (mc_dgp.phi_opt->count() == 0) mc_dgp.phi = 0.5;
        if (mc_dgp.seed_opt->count() == 0) mc_dgp.seed = kFig5PresetSeed;
      }
      const auto estimators = split_list(mc_estimators, ',');
      if (estimators.empty()) throw UsageError("--estimators needs at least one kind");
      for (const auto& e : estimators) parse_kind_or_usage(e);
      cfg["command"] = "monte-carlo";
      cfg["dgp"] = dgp_to_json(mc_dgp);
      cfg["reps"] = mc_reps;
      cfg["estimators"] = estimators;
      cfg["bandwidth"] = mc_bandwidth;
      cfg["seed"] = mc_dgp.seed;
    } else if (app.got_subcommand(channels)) {
      for (const auto& t : ch_in.transforms) parse_transform(t);
      if (!ch_in.transforms.empty()) {
        throw UsageError("--transform is not supported by channels (no ordering to lag along)");
      }
      cfg["command"] = "channels";
      cfg["input"] = input_to_json(ch_in);
      if (ch_width_opt->count() > 0) {
        if (ch_width <= 0.0) throw UsageError("--width must be positive");
        cfg["width"] = ch_width;
      } else {
        cfg["width"] = nullptr;
      }
      cfg["theta"] = ch_theta;
      cfg["seed"] = 0;
    } else if (app.got_subcommand(rotate)) {
      if (rot_thetas_opt->count() > 0 && rot_grid_opt->count() > 0) {
        throw UsageError("--thetas conflicts with --grid-preset");
      }
      std::vector<double> thetas;
      if (rot_thetas_opt->count() > 0) {
        for (const auto& t : split_list(rot_thetas, ',')) {
          thetas.push_back(parse_double_or_usage(t, "rotation angle"));
        }
      } else {
        thetas = rot_grid == "full" ? sfd::full_rotation_grid() : sfd::coarse_rotation_grid();
      }
      if (thetas.empty()) throw UsageError("--thetas lists no angles");
      for (double t : thetas) {
        if (t < -89.0 || t > 90.0) {
          throw UsageError("rotation angles must lie in [-89, 90]");
        }
      }
      if (rot_width <= 0.0) throw UsageError("--width must be positive");
      const sfd::SEMethod se = parse_se_or_usage(rot_se);
      for (const auto& t : rot_in.transforms) parse_transform(t);
      if (!rot_in.transforms.empty()) {
        throw UsageError("--transform is not supported by rotate-sweep "
                         "(channels change at every angle)");
      }
      cfg["command"] = "rotate-sweep";
      cfg["input"] = input_to_json(rot_in);
      cfg["width"] = rot_width;
      cfg["thetas"] = thetas;
      cfg["se"] = rot_se;
      cfg["columns"] = columns_json(rot_columns);
      cfg["seed"] = se.seed;
    } else if (app.got_subcommand(bounds)) {
      auto parse_group = [](const std::string& text) {
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
          throw UsageError("group must look like NAME=COL[+COL...]; got '" + text + "'");
        }
        Json g;
        g["name"] = text.substr(0, eq);
        Json members = Json::array();
        for (const auto& m : split_list(text.substr(eq + 1), '+')) {
          if (m.empty()) throw UsageError("empty column in group '" + text + "'");
          members.push_back(m);
        }
        g["members"] = std::move(members);
        return g;
      };
      const auto kinds = split_list(eb_kinds, ',');
      if (kinds.empty()) throw UsageError("--kinds needs at least one estimator kind");
      for (const auto& k : kinds) {
        const auto kind = parse_kind_or_usage(k);
        if (kind != sfd::EstimatorKind::levels && kind != sfd::EstimatorKind::sfd) {
          throw UsageError("extreme-bounds covers levels and sfd only; got '" + k + "'");
        }
      }
      const sfd::SEMethod se = parse_se_or_usage(eb_se);
      for (const auto& t : eb_in.transforms) parse_transform(t);
      cfg["command"] = "extreme-bounds";
      cfg["input"] = input_to_json(eb_in);
      cfg["ordering"] = ordering_to_json(eb_ord);
      cfg["focal"] = parse_group(eb_focal);
      Json controls = Json::array();
      for (const auto& g : eb_controls) controls.push_back(parse_group(g));
      cfg["controls"] = std::move(controls);
      cfg["kinds"] = kinds;
      cfg["se"] = eb_se;
      cfg["seed"] = se.seed;
    } else if (app.got_subcommand(sdd)) {
      const sfd::SEMethod se = parse_se_or_usage(sdd_se);
      for (const auto& t : sdd_in.transforms) parse_transform(t);
      cfg["command"] = "sdd-check";
      cfg["input"] = input_to_json(sdd_in);
      cfg["ordering"] = ordering_to_json(sdd_ord);
      cfg["se"] = sdd_se;
      cfg["columns"] = columns_json(sdd_columns);
      cfg["seed"] = se.seed;
    } else if (app.got_subcommand(setab)) {
      const auto methods = split_list(st_methods, ';');
      if (methods.empty()) throw UsageError("--methods lists no standard-error methods");
      for (const auto& m : methods) parse_se_or_usage(m);
      for (const auto& t : st_in.transforms) parse_transform(t);
      cfg["command"] = "se-table";
      cfg["input"] = input_to_json(st_in);
      cfg["ordering"] = ordering_to_json(st_ord);
      cfg["kind"] = st_kind;
      cfg["methods"] = methods;
      cfg["columns"] = columns_json(st_columns);
      cfg["seed"] = 0;
    } else if (app.got_subcommand(rerun)) {
      cfg = sfd::read_json(rerun_config);
      if (!cfg.is_object() || !cfg.contains("command")) {
        throw UsageError("'" + rerun_config + "' is not an emitted config file");
      }
    }
    dispatch(cfg, out_dir);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sfd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
}
