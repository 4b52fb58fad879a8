#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sfd/differencing.hpp"
#include "sfd/io.hpp"
#include "sfd/ordering.hpp"
#include "sfd/robustness.hpp"

using namespace sfd;

namespace {

SpatialDataset fit_fixture() {
  return testutil::line_dataset({5.0, 9.2, 10.0, 14.4, 15.0, 20.1, 22.0, 29.9},
                                {1.0, 2.5, 3.0, 5.0, 5.5, 8.0, 9.2, 13.0});
}

}  // namespace

TEST_CASE("format_double survives a string round trip bit for bit") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.6789, 0.0, -0.0, 1e308}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.5) == "-1.5");
}

TEST_CASE("two-sided p-values and stars follow the normal convention") {
  CHECK(two_sided_p(1.959963984540054, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(two_sided_p(-1.959963984540054, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(two_sided_p(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(two_sided_p(1.0, 0.0) == 0.0);
  CHECK(two_sided_p(0.0, 0.0) == 1.0);
  CHECK(two_sided_p(3.0, 1.0) == two_sided_p(-3.0, 1.0));

  CHECK(significance_stars(0.0009) == "***");
  CHECK(significance_stars(0.009) == "**");
  CHECK(significance_stars(0.04) == "*");
  CHECK(significance_stars(0.06) == "");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.01) == "*");
  CHECK(significance_stars(0.001) == "**");
}

TEST_CASE("csv escaping quotes only what needs quoting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("has,comma") == "\"has,comma\"");
  CHECK(csv_escape("a\"b") == "\"a\"\"b\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
  CHECK(csv_escape("") == "");
}

TEST_CASE("atomic writes land whole and create parent directories") {
  testutil::TempDir dir;
  const std::string path = dir.str() + "/sub/deeper/out.json";
  const Json j = {{"alpha", 1}, {"beta", {1, 2, 3}}};
  write_json_atomic(path, j);
  CHECK(read_json(path) == j);
  CHECK(!std::filesystem::exists(path + ".tmp"));

  write_text_atomic(path, "second version");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second version");
}

TEST_CASE("io errors name the offending file") {
  testutil::TempDir dir;
  CHECK_THROWS_AS((void)read_json(dir.str() + "/missing.json"), IoError);

  const std::string bad = dir.str() + "/bad.json";
  write_text_atomic(bad, "{ not json");
  CHECK_THROWS_AS((void)read_json(bad), ParseError);

  // a file where a directory should be blocks the temp-file write
  CHECK_THROWS_AS(write_text_atomic(bad + "/child.txt", "x"), IoError);
}

TEST_CASE("fit results serialize with per-coefficient inference") {
  const SpatialDataset ds = fit_fixture();
  const FitResult r = fit(ds, order_1d(ds, 'x'), EstimatorKind::sfd, SEMethod::hc());

  const Json j = to_json(r);
  CHECK(j.at("schema") == "sfd.fit/1");
  CHECK(j.at("estimator") == "sfd");
  CHECK(j.at("coefficients").size() == 2);
  const Json& slope = j.at("coefficients").at(1);
  CHECK(slope.at("name") == "x");
  CHECK(slope.at("estimate").get<double>() == r.coefficients(1));
  CHECK(slope.at("se").get<double>() == r.se(1));
  CHECK(slope.at("z").get<double>() ==
        doctest::Approx(r.coefficients(1) / r.se(1)).epsilon(1e-12));
  CHECK(j.at("vcov").size() == 2);
  CHECK(j.at("vcov").at(0).size() == 2);

  const std::string csv = fit_csv(r);
  CHECK(csv.rfind("name,estimate,se,z,p,stars,estimator,se_method,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("(intercept)") != std::string::npos);

  const std::string table = coefficient_table(r);
  CHECK(table.find("R^2") != std::string::npos);
  CHECK(table.find("x") != std::string::npos);
  CHECK(table.find("sfd") != std::string::npos);
}

TEST_CASE("dgp configs round-trip through json") {
  DGPConfig c = DGPConfig::spillover(250, 1.5, 0.25, 987654321);
  c.sigma_eps = 0.7;
  c.lag = 3;
  const Json j = to_json(c);
  const DGPConfig back = dgp_config_from_json(j);
  CHECK(back.kind == c.kind);
  CHECK(back.n == c.n);
  CHECK(back.beta == c.beta);
  CHECK(back.alpha == c.alpha);
  CHECK(back.sigma_eps == c.sigma_eps);
  CHECK(back.lambda == c.lambda);
  CHECK(back.phi == c.phi);
  CHECK(back.scenario == c.scenario);
  CHECK(back.gamma == c.gamma);
  CHECK(back.lag == c.lag);
  CHECK(back.seed == c.seed);

  Json missing = j;
  missing.erase("phi");
  CHECK_THROWS_AS((void)dgp_config_from_json(missing), SchemaError);

  Json invalid = j;
  invalid["n"] = 3;  // below the simulation minimum
  CHECK_THROWS_AS((void)dgp_config_from_json(invalid), DomainError);
}

TEST_CASE("monte carlo reports serialize in wide and long form") {
  std::vector<EstimatorSpec> specs(2);
  specs[0].kind = EstimatorKind::levels;
  specs[1].kind = EstimatorKind::sfd;
  const MonteCarloReport report =
      monte_carlo(DGPConfig::sinusoid(60, 360.0, 0.5, 4242), specs, 12);

  const Json j = to_json(report);
  CHECK(j.at("schema") == "sfd.monte_carlo/1");
  CHECK(j.at("reps") == 12);
  CHECK(j.at("estimators").size() == 2);
  const Json& sfd_j = j.at("estimators").at(1);
  CHECK(sfd_j.at("label") == "sfd");
  CHECK(sfd_j.at("completed") == 12);
  CHECK(sfd_j.at("summaries").at(1).contains("bias"));
  CHECK(sfd_j.at("summaries").at(1).contains("relative_efficiency"));
  // config embeds so a report can be rerun from its own artifact
  CHECK(dgp_config_from_json(j.at("config")).seed == 4242);

  const std::string csv = monte_carlo_csv(report);
  CHECK(csv.rfind("rep,estimator,coefficient,value\n", 0) == 0);
  // 12 reps x 2 estimators x 2 coefficients, plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 49);

  const std::string table = monte_carlo_table(report);
  CHECK(table.find("rel.eff") != std::string::npos);
  CHECK(table.find("levels") != std::string::npos);
}

TEST_CASE("sweep serialization keeps failures out of the flat csv") {
  const SpatialDataset ds = fit_fixture();
  // theta=90 slices the line into singletons and must fail
  const SweepResult sweep = rotation_sweep(ds, 1.0, {0.0, 90.0}, SEMethod::hc());
  REQUIRE(!sweep.entry_at(90.0).ok);

  const Json j = to_json(sweep);
  CHECK(j.at("schema") == "sfd.sweep/1");
  CHECK(j.at("axis") == "theta_degrees");
  CHECK(j.at("entries").size() == 2);
  CHECK(j.at("entries").at(0).at("ok") == true);
  CHECK(j.at("entries").at(0).contains("coefficients"));
  CHECK(j.at("entries").at(1).at("ok") == false);
  CHECK(j.at("entries").at(1).contains("reason"));
  CHECK(!j.at("entries").at(1).contains("coefficients"));
  CHECK(j.at("dispersion").size() == 2);
  CHECK(j.at("focal").size() == 0);

  const std::string csv = sweep_csv(sweep);
  CHECK(csv.rfind("axis_value,spec_id,estimator,coefficient,estimate,se\n", 0) == 0);
  // only the ok entry's two coefficients appear
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("theta=90") == std::string::npos);
}

TEST_CASE("sdd check serializes both fits and the gap table") {
  const SpatialDataset ds = fit_fixture();
  const SddCheckResult r = sdd_check(ds, order_1d(ds, 'x'), SEMethod::hc());
  const Json j = to_json(r);
  CHECK(j.at("schema") == "sfd.sdd_check/1");
  CHECK(j.at("sfd").at("estimator") == "sfd");
  CHECK(j.at("sdd").at("estimator") == "sdd");
  CHECK(j.at("gaps").size() == 2);
  CHECK(j.at("gaps").at(1).contains("combined_se"));
  const std::string table = sdd_table(r);
  CHECK(table.find("comb.se") != std::string::npos);
  CHECK(table.find("in 95% CI") != std::string::npos);
}

TEST_CASE("dataset csv round-trips exactly through the loader") {
  const SimulatedDataset sim = simulate(DGPConfig::sinusoid(25, 180.0, 0.4, 31));
  testutil::TempFile file(simulated_csv(sim));
  CsvSchema schema;
  schema.x = "pos_x";
  schema.y = "pos_y";
  schema.outcome = "y";
  schema.regressors = {"x"};
  const SpatialDataset back = load_csv(file.str(), schema);

  CHECK(back.ids == sim.data.ids);
  CHECK(back.positions == sim.data.positions);
  CHECK(back.outcome == sim.data.outcome);
  CHECK(back.X == sim.data.X);

  // the audit columns ride along and load like any regressor
  CsvSchema audit = schema;
  audit.regressors = {"x", "confounder", "noise"};
  const SpatialDataset full = load_csv(file.str(), audit);
  CHECK(full.X.col(1) == sim.confounder);
  CHECK(full.X.col(2) == sim.noise);
}

TEST_CASE("plain dataset csv carries no audit columns") {
  const SpatialDataset ds = fit_fixture();
  const std::string csv = dataset_csv(ds);
  CHECK(csv.rfind("id,pos_x,pos_y,y,x\n", 0) == 0);
  CHECK(csv.find("confounder") == std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("path csv lists channel, position, id") {
  const std::string csv = path_csv(testutil::single_channel(3));
  CHECK(csv == "channel,position,id\n0,0,p1\n0,1,p2\n0,2,p3\n");
}

TEST_CASE("design csv prefixes differenced columns by order") {
  const SpatialDataset ds = fit_fixture();
  const OrderedPath path = order_1d(ds, 'x');

  const std::string d1 = design_csv(spatial_first_difference(ds, path));
  CHECK(d1.rfind("row,channel,unit,neighbor,neighbor2,pos_x,pos_y,d_y,d_x\n", 0) == 0);
  CHECK(std::count(d1.begin(), d1.end(), '\n') == 8);

  const std::string d2 = design_csv(spatial_double_difference(ds, path));
  CHECK(d2.rfind("row,channel,unit,neighbor,neighbor2,pos_x,pos_y,dd_y,dd_x\n", 0) == 0);

  const std::string d0 = design_csv(levels_design(ds, path));
  CHECK(d0.rfind("row,channel,unit,neighbor,neighbor2,pos_x,pos_y,y,x\n", 0) == 0);
}

TEST_CASE("standard-error tables demand one fit presented several ways") {
  const SpatialDataset ds = fit_fixture();
  const DifferencedDesign design = spatial_first_difference(ds, order_1d(ds, 'x'));
  std::vector<std::pair<std::string, FitResult>> fits;
  fits.emplace_back("ols", fit_design(design, SEMethod::ols()));
  fits.emplace_back("hc", fit_design(design, SEMethod::hc()));
  fits.emplace_back("nw2", fit_design(design, SEMethod::newey_west(2)));

  const std::string csv = se_table_csv(fits);
  CHECK(csv.rfind("coefficient,estimate,se_ols,se_hc,se_nw2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const std::string text = se_table_text(fits);
  CHECK(text.find("[") != std::string::npos);
  CHECK(text.find("nw2") != std::string::npos);

  const Json j = se_table_json(fits);
  CHECK(j.at("schema") == "sfd.se_table/1");
  CHECK(j.at("methods").size() == 3);
  CHECK(j.at("methods").at(2).at("se_method") == "newey_west(lag=2)");

  // a fit of a different design cannot share the table
  std::vector<std::pair<std::string, FitResult>> mixed = fits;
  mixed.emplace_back("levels", fit_design(levels_design(ds, order_1d(ds, 'x')), SEMethod::hc()));
  CHECK_THROWS_AS((void)se_table_text(mixed), DomainError);
  CHECK_THROWS_AS((void)se_table_csv({}), DomainError);
}
