#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sfd/dataset.hpp"
#include "sfd/errors.hpp"
#include "sfd/ordering.hpp"

using namespace sfd;

TEST_CASE("load_csv reads roles and keeps remaining columns as regressors") {
  testutil::TempFile file(
      "id, x, y, outcome, rain, temp\n"
      "a, 0.0, 1.0, 10.5, 1, 20\n"
      "b, 1.0, 1.0, 11.5, 2, 21\n"
      "c, 2.0, 0.0, 12.5, 3, 22\n");
  CsvSchema schema;
  const SpatialDataset ds = load_csv(file.str(), schema);
  CHECK(ds.n_units() == 3);
  CHECK(ds.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(ds.positions(0, 0) == 0.0);
  CHECK(ds.positions(2, 1) == 0.0);
  CHECK(ds.outcome(1) == 11.5);
  CHECK(ds.outcome_name == "outcome");
  CHECK(ds.columns == std::vector<std::string>{"rain", "temp"});
  CHECK(ds.column("rain")(2) == 3.0);
  CHECK(ds.row_of("b") == 1);
  CHECK_THROWS_AS((void)ds.row_of("zz"), IntegrityError);
  CHECK_THROWS_AS((void)ds.column_index("zz"), SchemaError);
}

TEST_CASE("load_csv honors a custom schema and regressor subset") {
  testutil::TempFile file(
      "station,lon,lat,yield,rain,junk\n"
      "s1,0,0,5,1,9\n"
      "s2,1,0,6,2,9\n");
  CsvSchema schema;
  schema.id = "station";
  schema.x = "lon";
  schema.y = "lat";
  schema.outcome = "yield";
  schema.regressors = {"rain"};
  const SpatialDataset ds = load_csv(file.str(), schema);
  CHECK(ds.columns == std::vector<std::string>{"rain"});
  CHECK(ds.outcome_name == "yield");
  CHECK(ds.outcome(1) == 6.0);
}

TEST_CASE("load_csv rejects schema and value problems") {
  testutil::TempFile missing("id,x,outcome\na,0,1\n");
  CHECK_THROWS_AS((void)load_csv(missing.str(), CsvSchema{}), SchemaError);

  testutil::TempFile bad_number("id,x,y,outcome\na,0,0,1\nb,zap,0,2\n");
  CHECK_THROWS_WITH_AS((void)load_csv(bad_number.str(), CsvSchema{}),
                       doctest::Contains("row 2"), ParseError);

  testutil::TempFile nonfinite("id,x,y,outcome\na,0,0,nan\n");
  CHECK_THROWS_AS((void)load_csv(nonfinite.str(), CsvSchema{}), ParseError);

  testutil::TempFile dup("id,x,y,outcome\na,0,0,1\na,1,0,2\n");
  CHECK_THROWS_AS((void)load_csv(dup.str(), CsvSchema{}), IntegrityError);

  CHECK_THROWS_AS((void)load_csv("/definitely/not/here.csv", CsvSchema{}), Error);
}

TEST_CASE("make_dataset enforces invariants") {
  Matrix pos(2, 2);
  pos << 0, 0, 1, 0;
  Vector y(2);
  y << 1, 2;
  Matrix x(2, 1);
  x << 3, 4;

  CHECK_THROWS_AS((void)make_dataset({"a", "a"}, pos, y, "y", x, {"x"}), IntegrityError);

  Vector bad = y;
  bad(0) = std::nan("");
  CHECK_THROWS_AS((void)make_dataset({"a", "b"}, pos, bad, "y", x, {"x"}), Error);

  // one polygon for two units
  Matrix ring(3, 2);
  ring << 0, 0, 1, 0, 0, 1;
  CHECK_THROWS_AS((void)make_dataset({"a", "b"}, pos, y, "y", x, {"x"}, {ring}), Error);

  Matrix short_ring(2, 2);
  short_ring << 0, 0, 1, 0;
  CHECK_THROWS_AS((void)make_dataset({"a", "b"}, pos, y, "y", x, {"x"}, {ring, short_ring}),
                  Error);
}

TEST_CASE("degree_days splits hourly exposure at the threshold") {
  // 24 hours at 30 degrees, threshold 29: below = 29, above = 1
  std::vector<double> warm(24, 30.0);
  auto [below, above] = degree_days(warm, 29.0);
  CHECK(below == doctest::Approx(29.0).epsilon(1e-12));
  CHECK(above == doctest::Approx(1.0).epsilon(1e-12));

  // all sub-zero hours contribute nothing to either side
  std::vector<double> frozen(24, -5.0);
  auto [b2, a2] = degree_days(frozen, 10.0);
  CHECK(b2 == 0.0);
  CHECK(a2 == 0.0);

  // two days at 33 with threshold 32 accumulate: below 64, above 2
  std::vector<double> two_days(48, 33.0);
  auto [b3, a3] = degree_days(two_days, 32.0);
  CHECK(b3 == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(a3 == doctest::Approx(2.0).epsilon(1e-12));

  // mixed profile: 12h at 20 (all below), 12h at 35 (32 below + 3 above)
  std::vector<double> mixed;
  for (int h = 0; h < 12; ++h) mixed.push_back(20.0);
  for (int h = 0; h < 12; ++h) mixed.push_back(35.0);
  auto [b4, a4] = degree_days(mixed, 32.0);
  CHECK(b4 == doctest::Approx((12 * 20.0 + 12 * 32.0) / 24.0).epsilon(1e-12));
  CHECK(a4 == doctest::Approx(12 * 3.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("polynomial transform adds a power column and drops nothing") {
  const SpatialDataset ds = testutil::line_dataset({1, 2, 3, 4}, {1, 2, 3, 4});
  const OrderedPath path = order_1d(ds, 'x');
  TransformSpec spec;
  spec.kind = TransformSpec::Kind::polynomial;
  spec.column = "x";
  spec.degree = 2;
  spec.output = "x_sq";
  const SpatialDataset out = apply_transforms(ds, path, {spec});
  CHECK(out.n_units() == 4);
  CHECK(out.columns == std::vector<std::string>{"x", "x_sq"});
  CHECK(out.column("x_sq")(2) == 9.0);

  // reusing an existing name is refused
  TransformSpec clash = spec;
  clash.output = "x";
  CHECK_THROWS_AS((void)apply_transforms(ds, path, {clash}), SchemaError);
}

TEST_CASE("degree-day transform consumes hourly columns by prefix") {
  // two units, four hourly readings each
  Matrix pos(2, 2);
  pos << 0, 0, 1, 0;
  Vector y(2);
  y << 1, 2;
  Matrix x(2, 4);
  x << 30, 30, 30, 30, 10, 10, 40, 40;
  SpatialDataset ds = make_dataset({"a", "b"}, pos, y, "y",
                                   x, {"t_h1", "t_h2", "t_h3", "t_h4"});
  OrderedPath path = order_1d(ds, 'x');
  TransformSpec spec;
  spec.kind = TransformSpec::Kind::degree_days;
  spec.column = "t_h";
  spec.threshold = 29.0;
  spec.output = "dd";
  const SpatialDataset out = apply_transforms(ds, path, {spec});
  // unit a: 4 hours at 30 -> below 4*29/24, above 4*1/24
  CHECK(out.column("dd_below")(0) == doctest::Approx(4 * 29.0 / 24).epsilon(1e-12));
  CHECK(out.column("dd_above")(0) == doctest::Approx(4 * 1.0 / 24).epsilon(1e-12));
  // unit b: 2x10 below only, 2x(29 below + 11 above)
  CHECK(out.column("dd_below")(1) == doctest::Approx((2 * 10.0 + 2 * 29.0) / 24).epsilon(1e-12));
  CHECK(out.column("dd_above")(1) == doctest::Approx(2 * 11.0 / 24).epsilon(1e-12));
}

TEST_CASE("spatial lag drops uncovered units and short channels") {
  const SpatialDataset ds = testutil::line_dataset({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50});
  // two channels: {p1,p2,p3} and {p4}; p5 not covered by the path
  OrderedPath path;
  path.channels = {{"p1", "p2", "p3"}, {"p4"}};
  path.direction = "x";
  TransformSpec spec;
  spec.kind = TransformSpec::Kind::spatial_lag;
  spec.column = "x";
  spec.offset = 1;
  spec.output = "x_lag";
  const SpatialDataset out = apply_transforms(ds, path, {spec});
  // p1 loses its lag, the p4 channel is shorter than offset+1, p5 uncovered
  CHECK(out.n_units() == 2);
  CHECK(out.has_unit("p2"));
  CHECK(out.has_unit("p3"));
  CHECK(out.column("x_lag")(out.row_of("p2")) == 10.0);
  CHECK(out.column("x_lag")(out.row_of("p3")) == 20.0);
  CHECK(out.metadata.at("dropped_units") == "3");
  CHECK(out.metadata.at("dropped_channels") == "1");
}

TEST_CASE("polygons attach by id and drive centroids") {
  testutil::TempFile data(
      "id,x,y,outcome\n"
      "a,0,0,1\n"
      "b,5,5,2\n");
  testutil::TempFile rings(
      "id,vertex_index,x,y\n"
      "a,1,0,0\n"
      "a,2,2,0\n"
      "a,3,2,2\n"
      "a,4,0,2\n");
  SpatialDataset ds = load_csv(data.str(), CsvSchema{});
  ds = load_polygons(std::move(ds), rings.str());
  REQUIRE(ds.has_polygons());
  CHECK(ds.polygons[0].rows() == 4);
  CHECK(ds.polygons[1].rows() == 0);
  // unit square centroid at (1, 1); point unit keeps its position
  CHECK(ds.centroid_of(0).x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ds.centroid_of(0).y() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ds.centroid_of(1).x() == 5.0);

  testutil::TempFile unknown("id,vertex_index,x,y\nzz,1,0,0\nzz,2,1,0\nzz,3,1,1\n");
  SpatialDataset fresh = load_csv(data.str(), CsvSchema{});
  CHECK_THROWS_AS((void)load_polygons(std::move(fresh), unknown.str()), Error);

  testutil::TempFile degenerate("id,vertex_index,x,y\na,1,0,0\na,2,1,0\n");
  SpatialDataset fresh2 = load_csv(data.str(), CsvSchema{});
  CHECK_THROWS_AS((void)load_polygons(std::move(fresh2), degenerate.str()), Error);
}
