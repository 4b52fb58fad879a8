#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/linalg.hpp"
#include "sfd/path.hpp"

namespace sfd {

/**
 * Cross-sectional sample: one row per spatial unit, planar coordinates.
 * Every id is unique, every stored value finite, and polygon rings (when
 * present) have at least 3 vertices. Construct through `make_dataset` or
 * `load_csv` so the invariants are checked once, then treat as immutable.
 */
struct SpatialDataset {
  std::vector<std::string> ids;
  Matrix positions;  // n x 2, planar (x, y)
  Vector outcome;
  std::string outcome_name = "y";
  Matrix X;  // n x k regressors
  std::vector<std::string> columns;
  // Per-unit ring, n x 2 vertex matrix; zero rows means the unit is a point.
  // Either empty (no polygon data at all) or one entry per unit.
  std::vector<Matrix> polygons;
  // Free-form provenance notes (transform drop counts, simulation settings).
  std::map<std::string, std::string> metadata;

  Index n_units() const { return static_cast<Index>(ids.size()); }
  Index n_columns() const { return X.cols(); }
  bool has_polygons() const { return !polygons.empty(); }

  Index row_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw IntegrityError("unknown unit id '" + id + "'");
    return it->second;
  }
  bool has_unit(const std::string& id) const { return index_.count(id) != 0; }

  Index column_index(const std::string& name) const {
    for (Index j = 0; j < static_cast<Index>(columns.size()); ++j)
      if (columns[static_cast<std::size_t>(j)] == name) return j;
    throw SchemaError("dataset has no column '" + name + "'");
  }
  Vector column(const std::string& name) const { return X.col(column_index(name)); }

  // Unit location used for kernels and band ordering: the polygon centroid
  // when a ring is present, otherwise the stored position.
  Eigen::Vector2d centroid_of(Index row) const;

  void rebuild_index();

 private:
  std::unordered_map<std::string, Index> index_;
};

// Validates invariants (unique ids, finite values, consistent shapes,
// rings with >= 3 vertices) and builds the id index.
SpatialDataset make_dataset(std::vector<std::string> ids, Matrix positions, Vector outcome,
                            std::string outcome_name, Matrix X, std::vector<std::string> columns,
                            std::vector<Matrix> polygons = {});

/** Column roles for CSV ingestion. */
struct CsvSchema {
  std::string id = "id";
  std::string x = "x";
  std::string y = "y";
  std::string outcome = "outcome";
  // Empty means: every column that is not a role column is a regressor,
  // in file order.
  std::vector<std::string> regressors;
};

// Reads a comma-separated table with a header row. Cells may not contain
// commas or quotes; surrounding whitespace is trimmed. Errors: SchemaError
// for missing columns, ParseError for malformed or non-finite numeric cells
// (citing the 1-based data row), IntegrityError for duplicate ids.
SpatialDataset load_csv(const std::string& file_path, const CsvSchema& schema);

// Attaches polygon rings from a companion table with columns
// id, vertex_index, x, y. Vertices are ordered by vertex_index within id.
// Units absent from the table stay points. Unknown ids, rings with fewer
// than 3 vertices, and duplicate (id, vertex_index) pairs are errors.
SpatialDataset load_polygons(SpatialDataset ds, const std::string& file_path);

// Degree days below and above `threshold` accumulated over hourly
// temperatures: below = sum(max(T,0) - max(T-threshold,0))/24,
// above = sum(max(T-threshold,0))/24. The 1/24 converts hour sums to days,
// so a multi-day series accumulates.
std::pair<double, double> degree_days(const std::vector<double>& hourly_temps, double threshold);

/**
 * One derived-column recipe. `kind` selects which fields apply:
 *   polynomial:  column, degree (>= 2), output
 *   degree_days: column is a name prefix selecting the hourly columns in
 *                dataset order; threshold; emits output+"_below"/"_above"
 *   spatial_lag: column, offset (>= 1), output; computed within channels
 *                of the path, in levels, before any differencing
 */
struct TransformSpec {
  enum class Kind { polynomial, degree_days, spatial_lag };
  Kind kind = Kind::polynomial;
  std::string column;
  int degree = 2;
  double threshold = 0.0;
  int offset = 1;
  std::string output;
};

// Applies the specs in order and returns a new dataset. Spatial lags drop
// the first `offset` units of each channel, drop channels shorter than
// offset+1 entirely, and drop units the path does not cover; the counts are
// recorded in metadata ("dropped_units", "dropped_channels"). Polynomial and
// degree-day transforms never drop units. Re-using an existing output name
// is a SchemaError.
SpatialDataset apply_transforms(const SpatialDataset& ds, const OrderedPath& path,
                                const std::vector<TransformSpec>& specs);

}  // namespace sfd
