#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/estimation.hpp"
#include "sfd/linalg.hpp"

namespace sfd {

/**
 * Synthetic data-generating processes. All sinusoids are evaluated in
 * degrees. Units sit on a line at positions (i, 0), i = 1..n, id "u%06d".
 *
 *   sinusoid      x_i = sin(i) + phi*delta_i, c_i = sin(360 i / lambda)
 *                 + phi*eta_i, y = x*beta + c*alpha + eps.
 *   common_cause  z = i/n; scenario a: x = z, c = z - z^2/2 (the concave
 *                 confounder is tilted so levels bias is strictly positive);
 *                 b: x = sin(6*360*z), c = z - z^2; c: x and c both
 *                 z - z^2. Every scenario adds independent N(0, 5e-4^2)
 *                 measurement noise to x and c.
 *   spillover     iid standard-normal x; y_i = x_i*beta + x_{i-lag}*gamma
 *                 + eps_i; the pre-sample x values are drawn too and the
 *                 lagged regressor is stored as column "x_lag".
 *   smooth_trend  iid standard-normal x; confounder g(z) = sin(360 z),
 *                 z = i/n; y = x*beta + g*alpha + eps.
 */
struct DGPConfig {
  enum class Kind { sinusoid, common_cause, spillover, smooth_trend };
  Kind kind = Kind::sinusoid;
  Index n = 1000;
  double beta = 1.0;
  double alpha = 1.0;
  double sigma_eps = 1.0;
  double lambda = 360.0;
  double phi = 0.5;
  char scenario = 'a';
  double gamma = 0.5;
  int lag = 1;
  std::uint64_t seed = 0;

  void validate() const;

  static DGPConfig sinusoid(Index n, double lambda, double phi, std::uint64_t seed);
  // Fig-4-style curvature panels need noise far below the unit-scale
  // signals, so this factory sets sigma_eps = 0.01.
  static DGPConfig common_cause(Index n, char scenario, std::uint64_t seed);
  static DGPConfig spillover(Index n, double beta, double gamma, std::uint64_t seed);
  static DGPConfig smooth_trend(Index n, std::uint64_t seed);
};

std::string to_string(DGPConfig::Kind kind);
DGPConfig::Kind dgp_kind_from_string(const std::string& name);

// Structural slope values by regressor column name; the intercept carries
// no entry because confounders shift it DGP by DGP.
std::map<std::string, double> truth_parameters(const DGPConfig& config);

struct SimulatedDataset {
  SpatialDataset data;
  Vector confounder;
  Vector noise;
  std::map<std::string, double> truth;
  DGPConfig config;
  std::string scenario_formula;

  // y - X*truth - alpha*confounder - noise; zero to 1e-12 by construction.
  Vector construction_gap() const;
};

SimulatedDataset simulate(const DGPConfig& config);
SimulatedDataset simulate_sinusoid(Index n, double lambda, double phi, std::uint64_t seed);
SimulatedDataset simulate_common_cause(Index n, char scenario, std::uint64_t seed);
SimulatedDataset simulate_spillover(Index n, double beta, double gamma, std::uint64_t seed);

// One estimator to run each Monte Carlo rep. `columns` empty means all
// regressors; `bandwidth` only applies to robinson.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::sfd;
  std::vector<std::string> columns;
  int bandwidth = 2;
  std::string label;

  std::string effective_label() const { return label.empty() ? to_string(kind) : label; }
};

struct CoefficientSummary {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double bias = 0.0;
  bool has_truth = false;
  // SD of the first estimator's draw of this coefficient over this
  // estimator's SD; 1 for the first estimator itself.
  double relative_efficiency = 1.0;
  bool has_relative_efficiency = false;
};

struct EstimatorReport {
  std::string label;
  EstimatorKind kind = EstimatorKind::sfd;
  std::vector<std::string> coef_names;
  Matrix draws;
  // rep index behind each draw row; shorter than `reps` when reps failed
  std::vector<int> rep_ids;
  std::vector<CoefficientSummary> summaries;
  int failures = 0;
  std::vector<std::string> failure_reasons;

  const CoefficientSummary& summary_for(const std::string& coef) const;
};

struct MonteCarloReport {
  DGPConfig config;
  int reps = 0;
  std::vector<EstimatorReport> estimators;

  const EstimatorReport& estimator(const std::string& label) const;
};

/**
 * Runs `reps` independent draws; rep r simulates with the stream derived
 * from (config.seed, r), orders units along x, and runs every estimator.
 * An estimator failing on a rep is recorded (count plus first reasons) and
 * that rep is missing from its draw matrix. Deterministic given the master
 * seed. reps >= 2.
 */
MonteCarloReport monte_carlo(const DGPConfig& config,
                             const std::vector<EstimatorSpec>& estimators, int reps);

}  // namespace sfd
