#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sfd/dataset.hpp"
#include "sfd/differencing.hpp"
#include "sfd/estimation.hpp"
#include "sfd/path.hpp"
#include "sfd/robustness.hpp"
#include "sfd/simulation.hpp"

namespace sfd {

// Insertion-ordered so emitted documents are stable byte-for-byte.
using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form; deterministic across runs.
std::string format_double(double v);

// Two-sided normal p-value for estimate/se; se <= 0 degenerates to 0 for a
// nonzero estimate and 1 otherwise.
double two_sided_p(double estimate, double se);

// "***" below 0.001, "**" below 0.01, "*" below 0.05, else "".
std::string significance_stars(double p);

// Quotes fields containing commas, quotes, or newlines.
std::string csv_escape(const std::string& field);

// Writes via a temp file in the same directory plus rename, so readers
// never observe a partial file. Throws IoError on filesystem failure.
void write_text_atomic(const std::string& path, const std::string& content);
void write_json_atomic(const std::string& path, const Json& j);
Json read_json(const std::string& path);

Json to_json(const FitResult& r);
// One row per coefficient: name, estimate, se, z, p, stars plus fit-level
// columns repeated for flat sweep-style consumption.
std::string fit_csv(const FitResult& r);
std::string coefficient_table(const FitResult& r);

Json to_json(const DGPConfig& c);
DGPConfig dgp_config_from_json(const Json& j);

Json to_json(const MonteCarloReport& report);
// Long form: rep, estimator, coefficient, value.
std::string monte_carlo_csv(const MonteCarloReport& report);
std::string monte_carlo_table(const MonteCarloReport& report);

Json to_json(const SweepResult& s);
// Long form: axis value, spec id, estimator, coefficient, estimate, se.
std::string sweep_csv(const SweepResult& s);

Json to_json(const SddCheckResult& r);
std::string sdd_table(const SddCheckResult& r);

// id, x, y, outcome, regressors; simulated datasets append the confounder
// and noise columns for audit.
std::string dataset_csv(const SpatialDataset& ds);
std::string simulated_csv(const SimulatedDataset& sim);

// channel, position, id.
std::string path_csv(const OrderedPath& path);

// Differenced rows with their source-unit map for audit.
std::string design_csv(const DifferencedDesign& d);

// Side-by-side standard errors for one set of coefficients: text uses the
// bracket convention (SE beneath each estimate), CSV one SE column per
// method. All fits must share coefficient names.
std::string se_table_text(const std::vector<std::pair<std::string, FitResult>>& fits);
std::string se_table_csv(const std::vector<std::pair<std::string, FitResult>>& fits);
Json se_table_json(const std::vector<std::pair<std::string, FitResult>>& fits);

}  // namespace sfd
