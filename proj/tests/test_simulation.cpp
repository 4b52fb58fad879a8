#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sfd/estimation.hpp"
#include "sfd/rng.hpp"
#include "sfd/simulation.hpp"

using namespace sfd;

namespace {
double deg_sin(double degrees) { return std::sin(degrees * std::numbers::pi / 180.0); }
}  // namespace

TEST_CASE("seed derivation separates streams deterministically") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  auto g1 = derived_stream(42, 3);
  auto g2 = derived_stream(42, 3);
  CHECK(g1() == g2());
}

TEST_CASE("simulate is reproducible and seed-sensitive") {
  const DGPConfig cfg = DGPConfig::sinusoid(50, 360.0, 0.5, 2024);
  const SimulatedDataset a = simulate(cfg);
  const SimulatedDataset b = simulate(cfg);
  CHECK(a.data.outcome == b.data.outcome);
  CHECK(a.data.X == b.data.X);

  DGPConfig other = cfg;
  other.seed = 2025;
  const SimulatedDataset c = simulate(other);
  CHECK(a.data.outcome != c.data.outcome);
}

TEST_CASE("simulated units sit on the unit-spaced line") {
  const SimulatedDataset sim = simulate(DGPConfig::sinusoid(12, 360.0, 0.5, 1));
  CHECK(sim.data.ids.front() == "u000001");
  CHECK(sim.data.ids.back() == "u000012");
  for (Index i = 0; i < 12; ++i) {
    CHECK(sim.data.positions(i, 0) == static_cast<double>(i + 1));
    CHECK(sim.data.positions(i, 1) == 0.0);
  }
  CHECK(sim.data.outcome_name == "y");
  CHECK(sim.data.metadata.at("dgp") == "sinusoid");
}

TEST_CASE("outcomes decompose exactly into signal, confounder, and noise") {
  for (const DGPConfig& cfg :
       {DGPConfig::sinusoid(40, 180.0, 0.3, 5), DGPConfig::common_cause(40, 'b', 6),
        DGPConfig::spillover(40, 1.0, 0.5, 7), DGPConfig::smooth_trend(40, 8)}) {
    const SimulatedDataset sim = simulate(cfg);
    CHECK(sim.construction_gap().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sinusoid dgp without noise is the pure pair of sinusoids") {
  DGPConfig cfg = DGPConfig::sinusoid(720, 90.0, 0.0, 3);
  cfg.sigma_eps = 0.0;
  const SimulatedDataset sim = simulate(cfg);
  for (Index i : {Index(0), Index(89), Index(180), Index(533)}) {
    const double t = static_cast<double>(i + 1);
    CHECK(sim.data.X(i, 0) == doctest::Approx(deg_sin(t)).epsilon(1e-12));
    CHECK(sim.confounder(i) == doctest::Approx(deg_sin(360.0 * t / 90.0)).epsilon(1e-12));
  }
  // y = x + c exactly when beta = alpha = 1 and all noise is off
  CHECK((sim.data.outcome - sim.data.X.col(0) - sim.confounder).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("common-cause scenarios trace their stated curves") {
  for (char scenario : {'a', 'b', 'c'}) {
    const SimulatedDataset sim = simulate(DGPConfig::common_cause(200, scenario, 11));
    CHECK(sim.scenario_formula.find("z = i/n") == 0);
    for (Index i : {Index(0), Index(99), Index(199)}) {
      const double z = static_cast<double>(i + 1) / 200.0;
      double xs = 0.0, cs = 0.0;
      switch (scenario) {
        case 'a': xs = z; cs = z - 0.5 * z * z; break;
        case 'b': xs = deg_sin(6.0 * 360.0 * z); cs = z - z * z; break;
        case 'c': xs = z - z * z; cs = z - z * z; break;
      }
      // measurement noise has sd 5e-4; 6 sigma bounds the gap
      CHECK(std::abs(sim.data.X(i, 0) - xs) < 6 * 5e-4);
      CHECK(std::abs(sim.confounder(i) - cs) < 6 * 5e-4);
    }
  }
}

TEST_CASE("spillover dgp carries the lagged treatment column") {
  const DGPConfig cfg = DGPConfig::spillover(100, 2.0, 0.7, 13);
  const SimulatedDataset sim = simulate(cfg);
  CHECK(sim.data.columns == std::vector<std::string>{"x", "x_lag"});
  CHECK(sim.truth.at("x") == 2.0);
  CHECK(sim.truth.at("x_lag") == 0.7);
  // lag 1: the lag column is the previous unit's treatment
  for (Index i = 1; i < 100; ++i) {
    CHECK(sim.data.X(i, 1) == sim.data.X(i - 1, 0));
  }

  DGPConfig lag3 = cfg;
  lag3.lag = 3;
  const SimulatedDataset sim3 = simulate(lag3);
  for (Index i = 3; i < 100; ++i) {
    CHECK(sim3.data.X(i, 1) == sim3.data.X(i - 3, 0));
  }
}

TEST_CASE("config validation rejects broken settings") {
  CHECK_THROWS_AS((void)simulate(DGPConfig::sinusoid(5, 360.0, 0.5, 1)), DomainError);
  CHECK_THROWS_AS((void)simulate(DGPConfig::sinusoid(100, 0.0, 0.5, 1)), DomainError);
  CHECK_THROWS_AS((void)simulate(DGPConfig::sinusoid(100, 360.0, -0.1, 1)), DomainError);
  CHECK_THROWS_AS((void)simulate(DGPConfig::common_cause(100, 'q', 1)), DomainError);
  DGPConfig bad_lag = DGPConfig::spillover(100, 1.0, 0.5, 1);
  bad_lag.lag = 100;
  CHECK_THROWS_AS((void)simulate(bad_lag), DomainError);
  DGPConfig neg_sigma = DGPConfig::smooth_trend(100, 1);
  neg_sigma.sigma_eps = -1.0;
  CHECK_THROWS_AS((void)simulate(neg_sigma), DomainError);
}

TEST_CASE("monte carlo summarizes coefficient draws per estimator") {
  const DGPConfig cfg = DGPConfig::sinusoid(150, 360.0, 0.5, 99);
  std::vector<EstimatorSpec> specs(2);
  specs[0].kind = EstimatorKind::levels;
  specs[1].kind = EstimatorKind::sfd;
  const MonteCarloReport report = monte_carlo(cfg, specs, 40);

  CHECK(report.reps == 40);
  REQUIRE(report.estimators.size() == 2);
  const EstimatorReport& levels = report.estimators[0];
  const EstimatorReport& sfd = report.estimators[1];
  CHECK(levels.label == "levels");
  CHECK(sfd.label == "sfd");
  CHECK(levels.draws.rows() == 40);
  CHECK(levels.failures == 0);
  CHECK(sfd.rep_ids.size() == 40);

  const CoefficientSummary& s = sfd.summary_for("x");
  CHECK(s.has_truth);
  CHECK(std::abs(s.bias) < 0.1);
  CHECK(s.q025 < s.mean);
  CHECK(s.mean < s.q975);
  CHECK(s.sd == doctest::Approx(std::sqrt(s.variance)).epsilon(1e-12));

  // the first estimator is the efficiency baseline
  CHECK(levels.summary_for("x").relative_efficiency == doctest::Approx(1.0).epsilon(1e-12));
  const double expected = levels.summary_for("x").sd / sfd.summary_for("x").sd;
  CHECK(sfd.summary_for("x").relative_efficiency == doctest::Approx(expected).epsilon(1e-12));
  CHECK(sfd.summary_for("x").has_relative_efficiency);
  CHECK_THROWS_AS((void)sfd.summary_for("ghost"), DomainError);
  CHECK(&report.estimator("sfd") == &sfd);
  CHECK_THROWS_AS((void)report.estimator("ghost"), DomainError);
}

TEST_CASE("monte carlo reruns bit-identically and reacts to the seed") {
  const DGPConfig cfg = DGPConfig::sinusoid(80, 360.0, 0.5, 55);
  std::vector<EstimatorSpec> specs(1);
  specs[0].kind = EstimatorKind::sfd;
  const MonteCarloReport a = monte_carlo(cfg, specs, 20);
  const MonteCarloReport b = monte_carlo(cfg, specs, 20);
  CHECK(a.estimators[0].draws == b.estimators[0].draws);

  DGPConfig reseeded = cfg;
  reseeded.seed = 56;
  const MonteCarloReport c = monte_carlo(reseeded, specs, 20);
  CHECK(a.estimators[0].draws != c.estimators[0].draws);
}

TEST_CASE("per-estimator failures are counted, not fatal") {
  const DGPConfig cfg = DGPConfig::sinusoid(60, 360.0, 0.5, 77);
  std::vector<EstimatorSpec> specs(2);
  specs[0].kind = EstimatorKind::sfd;
  specs[1].kind = EstimatorKind::sfd;
  specs[1].columns = {"not_a_column"};
  specs[1].label = "broken";
  const MonteCarloReport report = monte_carlo(cfg, specs, 12);
  CHECK(report.estimators[0].failures == 0);
  CHECK(report.estimators[1].failures == 12);
  CHECK(report.estimators[1].draws.rows() == 0);
  REQUIRE(!report.estimators[1].failure_reasons.empty());
  CHECK(report.estimators[1].failure_reasons.size() <= 8);
  CHECK(report.estimators[1].summaries.empty());
}

TEST_CASE("monte carlo validates its inputs") {
  const DGPConfig cfg = DGPConfig::sinusoid(60, 360.0, 0.5, 1);
  std::vector<EstimatorSpec> specs(1);
  specs[0].kind = EstimatorKind::sfd;
  CHECK_THROWS_AS((void)monte_carlo(cfg, specs, 1), DomainError);
  CHECK_THROWS_AS((void)monte_carlo(cfg, {}, 10), DomainError);
  std::vector<EstimatorSpec> dup(2);
  dup[0].kind = EstimatorKind::sfd;
  dup[1].kind = EstimatorKind::sfd;
  CHECK_THROWS_AS((void)monte_carlo(cfg, dup, 10), DomainError);
}

TEST_CASE("robinson rides along in monte carlo") {
  const DGPConfig cfg = DGPConfig::smooth_trend(80, 5);
  std::vector<EstimatorSpec> specs(2);
  specs[0].kind = EstimatorKind::sfd;
  specs[1].kind = EstimatorKind::robinson;
  specs[1].bandwidth = 3;
  const MonteCarloReport report = monte_carlo(cfg, specs, 15);
  CHECK(report.estimators[1].failures == 0);
  CHECK(std::abs(report.estimators[1].summary_for("x").bias) < 0.2);
}

TEST_CASE("summary statistics kernels match hand values") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(v) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(variance_of(v) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  // linear interpolation between order statistics
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(std::vector<double>{7.0}, 0.5) == 7.0);
  CHECK(variance_of(std::vector<double>{7.0}) == 0.0);
  CHECK_THROWS_AS((void)quantile(std::vector<double>{}, 0.5), DomainError);
  CHECK_THROWS_AS((void)quantile(v, 1.5), DomainError);
}

TEST_CASE("truth parameters carry only slope coefficients") {
  const auto t1 = truth_parameters(DGPConfig::sinusoid(100, 360.0, 0.5, 1));
  CHECK(t1.size() == 1);
  CHECK(t1.at("x") == 1.0);
  const auto t2 = truth_parameters(DGPConfig::spillover(100, 1.5, 0.25, 1));
  CHECK(t2.size() == 2);
  CHECK(t2.at("x_lag") == 0.25);
}
