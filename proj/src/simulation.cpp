#include "sfd/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "sfd/differencing.hpp"
#include "sfd/errors.hpp"
#include "sfd/geometry.hpp"
#include "sfd/ordering.hpp"
#include "sfd/rng.hpp"

namespace sfd {

namespace {

constexpr double kMeasurementNoiseSd = 5e-4;

std::vector<std::string> line_ids(Index n) {
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  char buf[32];
  for (Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "u%06lld", static_cast<long long>(i + 1));
    ids[static_cast<std::size_t>(i)] = buf;
  }
  return ids;
}

Matrix line_positions(Index n) {
  Matrix p(n, 2);
  for (Index i = 0; i < n; ++i) {
    p(i, 0) = static_cast<double>(i + 1);
    p(i, 1) = 0.0;
  }
  return p;
}

Vector draw_normal(std::mt19937_64& gen, Index n, double sd) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = sd * dist(gen);
  return v;
}

SimulatedDataset assemble(const DGPConfig& config, Matrix x,
                          std::vector<std::string> columns, Vector confounder, Vector eps,
                          std::string formula) {
  const Index n = config.n;
  Vector y = Vector::Zero(n);
  const auto truth = truth_parameters(config);
  for (Index j = 0; j < x.cols(); ++j) {
    y += truth.at(columns[static_cast<std::size_t>(j)]) * x.col(j);
  }
  y += config.alpha * confounder + eps;

  SimulatedDataset sim;
  sim.data = make_dataset(line_ids(n), line_positions(n), std::move(y), "y", std::move(x),
                          std::move(columns));
  sim.data.metadata["dgp"] = to_string(config.kind);
  if (!formula.empty()) sim.data.metadata["scenario_formula"] = formula;
  sim.confounder = std::move(confounder);
  sim.noise = std::move(eps);
  sim.truth = truth;
  sim.config = config;
  sim.scenario_formula = std::move(formula);
  return sim;
}

}  // namespace

void DGPConfig::validate() const {
  if (n < 10) throw DomainError("simulated sample size must be >= 10");
  if (sigma_eps < 0.0) throw DomainError("sigma_eps must be >= 0");
  switch (kind) {
    case Kind::sinusoid:
      if (lambda <= 0.0) throw DomainError("sinusoid wavelength lambda must be > 0");
      if (phi < 0.0) throw DomainError("sinusoid noise scale phi must be >= 0");
      break;
    case Kind::common_cause:
      if (scenario != 'a' && scenario != 'b' && scenario != 'c') {
        throw DomainError("common_cause scenario must be 'a', 'b', or 'c'");
      }
      break;
    case Kind::spillover:
      if (lag < 1) throw DomainError("spillover lag must be >= 1");
      if (static_cast<Index>(lag) >= n) throw DomainError("spillover lag must be < n");
      break;
    case Kind::smooth_trend:
      break;
  }
}

DGPConfig DGPConfig::sinusoid(Index n, double lambda, double phi, std::uint64_t seed) {
  DGPConfig c;
  c.kind = Kind::sinusoid;
  c.n = n;
  c.lambda = lambda;
  c.phi = phi;
  c.seed = seed;
  return c;
}

DGPConfig DGPConfig::common_cause(Index n, char scenario, std::uint64_t seed) {
  DGPConfig c;
  c.kind = Kind::common_cause;
  c.n = n;
  c.scenario = scenario;
  c.sigma_eps = 0.01;
  c.seed = seed;
  return c;
}

DGPConfig DGPConfig::spillover(Index n, double beta, double gamma, std::uint64_t seed) {
  DGPConfig c;
  c.kind = Kind::spillover;
  c.n = n;
  c.beta = beta;
  c.gamma = gamma;
  c.seed = seed;
  return c;
}

DGPConfig DGPConfig::smooth_trend(Index n, std::uint64_t seed) {
  DGPConfig c;
  c.kind = Kind::smooth_trend;
  c.n = n;
  c.seed = seed;
  return c;
}

std::string to_string(DGPConfig::Kind kind) {
  switch (kind) {
    case DGPConfig::Kind::sinusoid: return "sinusoid";
    case DGPConfig::Kind::common_cause: return "common_cause";
    case DGPConfig::Kind::spillover: return "spillover";
    case DGPConfig::Kind::smooth_trend: return "smooth_trend";
  }
  throw DomainError("unreachable DGP kind");
}

DGPConfig::Kind dgp_kind_from_string(const std::string& name) {
  if (name == "sinusoid") return DGPConfig::Kind::sinusoid;
  if (name == "common_cause" || name == "common-cause") return DGPConfig::Kind::common_cause;
  if (name == "spillover") return DGPConfig::Kind::spillover;
  if (name == "smooth_trend" || name == "smooth-trend") return DGPConfig::Kind::smooth_trend;
  throw DomainError("unknown DGP kind '" + name + "'");
}

std::map<std::string, double> truth_parameters(const DGPConfig& config) {
  std::map<std::string, double> truth{{"x", config.beta}};
  if (config.kind == DGPConfig::Kind::spillover) truth["x_lag"] = config.gamma;
  return truth;
}

Vector SimulatedDataset::construction_gap() const {
  Vector gap = data.outcome - config.alpha * confounder - noise;
  for (Index j = 0; j < data.X.cols(); ++j) {
    gap -= truth.at(data.columns[static_cast<std::size_t>(j)]) * data.X.col(j);
  }
  return gap;
}

SimulatedDataset simulate(const DGPConfig& config) {
  config.validate();
  const Index n = config.n;
  auto gen = derived_stream(config.seed, 0);

  switch (config.kind) {
    case DGPConfig::Kind::sinusoid: {
      const Vector delta = draw_normal(gen, n, 1.0);
      const Vector eta = draw_normal(gen, n, 1.0);
      const Vector eps = draw_normal(gen, n, config.sigma_eps);
      Matrix x(n, 1);
      Vector c(n);
      for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1);
        x(i, 0) = std::sin(deg_to_rad(t)) + config.phi * delta(i);
        c(i) = std::sin(deg_to_rad(360.0 * t / config.lambda)) + config.phi * eta(i);
      }
      return assemble(config, std::move(x), {"x"}, std::move(c), eps, "");
    }
    case DGPConfig::Kind::common_cause: {
      const Vector nx = draw_normal(gen, n, kMeasurementNoiseSd);
      const Vector nc = draw_normal(gen, n, kMeasurementNoiseSd);
      const Vector eps = draw_normal(gen, n, config.sigma_eps);
      Matrix x(n, 1);
      Vector c(n);
      std::string formula;
      for (Index i = 0; i < n; ++i) {
        const double z = static_cast<double>(i + 1) / static_cast<double>(n);
        double xs = 0.0;
        double cs = 0.0;
        switch (config.scenario) {
          case 'a':
            xs = z;
            cs = z - 0.5 * z * z;
            break;
          case 'b':
            xs = std::sin(deg_to_rad(6.0 * 360.0 * z));
            cs = z - z * z;
            break;
          case 'c':
            xs = z - z * z;
            cs = z - z * z;
            break;
        }
        x(i, 0) = xs + nx(i);
        c(i) = cs + nc(i);
      }
      switch (config.scenario) {
        case 'a': formula = "z = i/n; x = z + u; c = z - z^2/2 + v"; break;
        case 'b': formula = "z = i/n; x = sin(6*360*z deg) + u; c = z - z^2 + v"; break;
        case 'c': formula = "z = i/n; x = z - z^2 + u; c = z - z^2 + v"; break;
      }
      formula += "; sd(u) = sd(v) = 5e-4";
      return assemble(config, std::move(x), {"x"}, std::move(c), eps, formula);
    }
    case DGPConfig::Kind::spillover: {
      // lag extra pre-sample draws so unit 1 has a complete history
      const Vector xfull = draw_normal(gen, n + config.lag, 1.0);
      const Vector eps = draw_normal(gen, n, config.sigma_eps);
      Matrix x(n, 2);
      for (Index i = 0; i < n; ++i) {
        x(i, 0) = xfull(i + config.lag);
        x(i, 1) = xfull(i);
      }
      return assemble(config, std::move(x), {"x", "x_lag"}, Vector::Zero(n), eps, "");
    }
    case DGPConfig::Kind::smooth_trend: {
      const Vector xdraw = draw_normal(gen, n, 1.0);
      const Vector eps = draw_normal(gen, n, config.sigma_eps);
      Matrix x(n, 1);
      x.col(0) = xdraw;
      Vector c(n);
      for (Index i = 0; i < n; ++i) {
        const double z = static_cast<double>(i + 1) / static_cast<double>(n);
        c(i) = std::sin(deg_to_rad(360.0 * z));
      }
      return assemble(config, std::move(x), {"x"}, std::move(c), eps, "");
    }
  }
  throw DomainError("unreachable DGP kind");
}

SimulatedDataset simulate_sinusoid(Index n, double lambda, double phi, std::uint64_t seed) {
  return simulate(DGPConfig::sinusoid(n, lambda, phi, seed));
}

SimulatedDataset simulate_common_cause(Index n, char scenario, std::uint64_t seed) {
  return simulate(DGPConfig::common_cause(n, scenario, seed));
}

SimulatedDataset simulate_spillover(Index n, double beta, double gamma, std::uint64_t seed) {
  return simulate(DGPConfig::spillover(n, beta, gamma, seed));
}

const CoefficientSummary& EstimatorReport::summary_for(const std::string& coef) const {
  for (const auto& s : summaries) {
    if (s.name == coef) return s;
  }
  throw DomainError("no Monte Carlo summary for coefficient '" + coef + "'");
}

const EstimatorReport& MonteCarloReport::estimator(const std::string& label) const {
  for (const auto& e : estimators) {
    if (e.label == label) return e;
  }
  throw DomainError("no Monte Carlo estimator labelled '" + label + "'");
}

namespace {

Vector one_draw(const SpatialDataset& data, const OrderedPath& path, const EstimatorSpec& e,
                std::vector<std::string>* names_out) {
  FitResult r;
  if (e.kind == EstimatorKind::robinson) {
    r = robinson_fit(data, path, e.bandwidth, e.columns);
  } else {
    // coefficient draws only; the cheap classical vcov is discarded
    const DifferencedDesign d = e.kind == EstimatorKind::levels
                                    ? levels_design(data, path)
                                : e.kind == EstimatorKind::sfd
                                    ? spatial_first_difference(data, path)
                                    : spatial_double_difference(data, path);
    r = fit_design(d, SEMethod::ols(), e.columns);
  }
  if (names_out != nullptr && names_out->empty()) *names_out = r.coef_names;
  return r.coefficients;
}

}  // namespace

MonteCarloReport monte_carlo(const DGPConfig& config,
                             const std::vector<EstimatorSpec>& estimators, int reps) {
  config.validate();
  if (reps < 2) throw DomainError("monte_carlo needs at least 2 reps");
  if (estimators.empty()) throw DomainError("monte_carlo needs at least one estimator");
  {
    std::vector<std::string> labels;
    for (const auto& e : estimators) labels.push_back(e.effective_label());
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw DomainError("estimator labels must be unique");
    }
  }

  const std::size_t n_est = estimators.size();
  std::vector<std::vector<Vector>> draws(n_est);
  std::vector<std::vector<int>> rep_ids(n_est);
  std::vector<int> failures(n_est, 0);
  std::vector<std::vector<std::string>> reasons(n_est);
  std::vector<std::vector<std::string>> names(n_est);
  constexpr std::size_t kMaxReasons = 8;

  OrderedPath path;
  for (int r = 0; r < reps; ++r) {
    DGPConfig rep_config = config;
    rep_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    const SimulatedDataset sim = simulate(rep_config);
    // unit layout is seed-independent, so the path is computed once
    if (r == 0) path = order_1d(sim.data, 'x');
    for (std::size_t e = 0; e < n_est; ++e) {
      try {
        draws[e].push_back(one_draw(sim.data, path, estimators[e], &names[e]));
        rep_ids[e].push_back(r);
      } catch (const Error& ex) {
        ++failures[e];
        if (reasons[e].size() < kMaxReasons) {
          reasons[e].push_back("rep " + std::to_string(r) + ": " + ex.what());
        }
      }
    }
  }

  const auto truth = truth_parameters(config);
  MonteCarloReport report;
  report.config = config;
  report.reps = reps;
  report.estimators.resize(n_est);
  for (std::size_t e = 0; e < n_est; ++e) {
    EstimatorReport& er = report.estimators[e];
    er.label = estimators[e].effective_label();
    er.kind = estimators[e].kind;
    er.coef_names = names[e];
    er.rep_ids = rep_ids[e];
    er.failures = failures[e];
    er.failure_reasons = reasons[e];
    const Index completed = static_cast<Index>(draws[e].size());
    const Index k = names[e].empty() ? 0 : static_cast<Index>(names[e].size());
    er.draws.resize(completed, k);
    for (Index r = 0; r < completed; ++r) {
      er.draws.row(r) = draws[e][static_cast<std::size_t>(r)].transpose();
    }
    if (completed < 2) continue;
    for (Index j = 0; j < k; ++j) {
      CoefficientSummary s;
      s.name = names[e][static_cast<std::size_t>(j)];
      const Vector col = er.draws.col(j);
      const std::vector<double> sample(col.data(), col.data() + col.size());
      s.mean = mean_of(sample);
      s.variance = variance_of(sample);
      s.sd = std::sqrt(s.variance);
      s.q025 = quantile(sample, 0.025);
      s.q975 = quantile(sample, 0.975);
      if (const auto it = truth.find(s.name); it != truth.end()) {
        s.bias = s.mean - it->second;
        s.has_truth = true;
      }
      er.summaries.push_back(std::move(s));
    }
  }

  // efficiency of each estimator against the first, per shared coefficient
  if (!report.estimators.empty()) {
    const EstimatorReport& base = report.estimators.front();
    for (auto& er : report.estimators) {
      for (auto& s : er.summaries) {
        for (const auto& bs : base.summaries) {
          if (bs.name == s.name && s.sd > 0.0) {
            s.relative_efficiency = bs.sd / s.sd;
            s.has_relative_efficiency = true;
          }
        }
      }
    }
  }
  return report;
}

}  // namespace sfd
