#include "sfd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sfd/geometry.hpp"

namespace sfd {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, std::size_t data_row, const std::string& column) {
  if (cell.empty())
    throw ParseError("empty cell at data row " + std::to_string(data_row) + ", column '" + column + "'");
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("cannot parse '" + cell + "' as a number at data row " + std::to_string(data_row) +
                     ", column '" + column + "'");
  if (!std::isfinite(value))
    throw ParseError("non-finite value at data row " + std::to_string(data_row) + ", column '" + column + "'");
  return value;
}

std::vector<std::string> read_lines(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ParseError("cannot open '" + file_path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("'" + file_path + "' has no header row");
  return lines;
}

std::size_t header_column(const std::vector<std::string>& header, const std::string& name,
                          const std::string& file_path) {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw SchemaError("'" + file_path + "' is missing column '" + name + "'");
}

}  // namespace

Eigen::Vector2d SpatialDataset::centroid_of(Index row) const {
  if (has_polygons()) {
    const Matrix& ring = polygons[static_cast<std::size_t>(row)];
    if (ring.rows() >= 3) return polygon_centroid(ring);
  }
  return positions.row(row).transpose();
}

void SpatialDataset::rebuild_index() {
  index_.clear();
  index_.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) throw IntegrityError("unit id at row " + std::to_string(i + 1) + " is empty");
    if (!index_.emplace(ids[i], static_cast<Index>(i)).second)
      throw IntegrityError("duplicate unit id '" + ids[i] + "'");
  }
}

SpatialDataset make_dataset(std::vector<std::string> ids, Matrix positions, Vector outcome,
                            std::string outcome_name, Matrix X, std::vector<std::string> columns,
                            std::vector<Matrix> polygons) {
  const auto n = static_cast<Index>(ids.size());
  if (positions.rows() != n || positions.cols() != 2)
    throw DomainError("make_dataset: positions must be n x 2");
  if (outcome.size() != n) throw DomainError("make_dataset: outcome length mismatch");
  if (X.rows() != n) throw DomainError("make_dataset: regressor row count mismatch");
  if (static_cast<Index>(columns.size()) != X.cols())
    throw DomainError("make_dataset: column name count mismatch");
  if (!polygons.empty() && static_cast<Index>(polygons.size()) != n)
    throw DomainError("make_dataset: polygon list must cover every unit or be empty");
  if (!positions.allFinite() || !outcome.allFinite() || (X.size() > 0 && !X.allFinite()))
    throw IntegrityError("make_dataset: non-finite value in dataset");

  std::unordered_set<std::string> names;
  for (const auto& c : columns) {
    if (c.empty()) throw SchemaError("make_dataset: empty column name");
    if (!names.insert(c).second) throw SchemaError("make_dataset: duplicate column name '" + c + "'");
  }
  for (const auto& ring : polygons) {
    if (ring.rows() == 0) continue;
    if (ring.cols() != 2) throw IntegrityError("make_dataset: polygon ring must be v x 2");
    if (ring.rows() < 3) throw IntegrityError("make_dataset: polygon ring has fewer than 3 vertices");
    if (!ring.allFinite()) throw IntegrityError("make_dataset: non-finite polygon vertex");
  }

  SpatialDataset ds;
  ds.ids = std::move(ids);
  ds.positions = std::move(positions);
  ds.outcome = std::move(outcome);
  ds.outcome_name = std::move(outcome_name);
  ds.X = std::move(X);
  ds.columns = std::move(columns);
  ds.polygons = std::move(polygons);
  ds.rebuild_index();
  return ds;
}

SpatialDataset load_csv(const std::string& file_path, const CsvSchema& schema) {
  const auto lines = read_lines(file_path);
  const auto header = split_csv_line(lines[0]);

  const std::size_t id_col = header_column(header, schema.id, file_path);
  const std::size_t x_col = header_column(header, schema.x, file_path);
  const std::size_t y_col = header_column(header, schema.y, file_path);
  const std::size_t out_col = header_column(header, schema.outcome, file_path);

  std::vector<std::string> reg_names = schema.regressors;
  if (reg_names.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == id_col || j == x_col || j == y_col || j == out_col) continue;
      reg_names.push_back(header[j]);
    }
  }
  std::vector<std::size_t> reg_cols;
  reg_cols.reserve(reg_names.size());
  for (const auto& name : reg_names) reg_cols.push_back(header_column(header, name, file_path));

  const auto n = static_cast<Index>(lines.size() - 1);
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  Matrix positions(n, 2);
  Vector outcome(n);
  Matrix X(n, static_cast<Index>(reg_cols.size()));

  for (Index i = 0; i < n; ++i) {
    const std::size_t data_row = static_cast<std::size_t>(i) + 1;
    const auto cells = split_csv_line(lines[data_row]);
    if (cells.size() != header.size())
      throw ParseError("data row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    const std::string id = cells[id_col];
    if (id.empty()) throw ParseError("empty id at data row " + std::to_string(data_row));
    ids[static_cast<std::size_t>(i)] = id;
    positions(i, 0) = parse_cell(cells[x_col], data_row, schema.x);
    positions(i, 1) = parse_cell(cells[y_col], data_row, schema.y);
    outcome(i) = parse_cell(cells[out_col], data_row, schema.outcome);
    for (std::size_t j = 0; j < reg_cols.size(); ++j)
      X(i, static_cast<Index>(j)) = parse_cell(cells[reg_cols[j]], data_row, reg_names[j]);
  }

  return make_dataset(std::move(ids), std::move(positions), std::move(outcome), schema.outcome,
                      std::move(X), std::move(reg_names));
}

SpatialDataset load_polygons(SpatialDataset ds, const std::string& file_path) {
  const auto lines = read_lines(file_path);
  const auto header = split_csv_line(lines[0]);
  const std::size_t id_col = header_column(header, "id", file_path);
  const std::size_t v_col = header_column(header, "vertex_index", file_path);
  const std::size_t x_col = header_column(header, "x", file_path);
  const std::size_t y_col = header_column(header, "y", file_path);

  struct Vertex {
    long order;
    double x, y;
  };
  std::unordered_map<std::string, std::vector<Vertex>> rings;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != header.size())
      throw ParseError("data row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    const std::string& id = cells[id_col];
    if (!ds.has_unit(id)) throw IntegrityError("polygon row for unknown unit id '" + id + "'");
    const auto order = static_cast<long>(parse_cell(cells[v_col], r, "vertex_index"));
    rings[id].push_back({order, parse_cell(cells[x_col], r, "x"), parse_cell(cells[y_col], r, "y")});
  }

  std::vector<Matrix> polygons(static_cast<std::size_t>(ds.n_units()));
  for (auto& [id, verts] : rings) {
    std::sort(verts.begin(), verts.end(), [](const Vertex& a, const Vertex& b) { return a.order < b.order; });
    for (std::size_t i = 1; i < verts.size(); ++i)
      if (verts[i].order == verts[i - 1].order)
        throw IntegrityError("duplicate vertex_index " + std::to_string(verts[i].order) + " for unit '" + id + "'");
    if (verts.size() < 3)
      throw IntegrityError("polygon for unit '" + id + "' has fewer than 3 vertices");
    Matrix ring(static_cast<Index>(verts.size()), 2);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      ring(static_cast<Index>(i), 0) = verts[i].x;
      ring(static_cast<Index>(i), 1) = verts[i].y;
    }
    polygons[static_cast<std::size_t>(ds.row_of(id))] = std::move(ring);
  }
  ds.polygons = std::move(polygons);
  return ds;
}

std::pair<double, double> degree_days(const std::vector<double>& hourly_temps, double threshold) {
  double below = 0.0, above = 0.0;
  for (double t : hourly_temps) {
    if (!std::isfinite(t)) throw DomainError("degree_days: non-finite temperature");
    below += std::max(t, 0.0) - std::max(t - threshold, 0.0);
    above += std::max(t - threshold, 0.0);
  }
  return {below / 24.0, above / 24.0};
}

namespace {

void require_new_column(const SpatialDataset& ds, const std::string& name) {
  for (const auto& c : ds.columns)
    if (c == name) throw SchemaError("transform output column '" + name + "' already exists");
}

void append_column(SpatialDataset& ds, const std::string& name, const Vector& values) {
  require_new_column(ds, name);
  Matrix wide(ds.X.rows(), ds.X.cols() + 1);
  wide << ds.X, values;
  ds.X = std::move(wide);
  ds.columns.push_back(name);
}

SpatialDataset keep_rows(const SpatialDataset& ds, const std::vector<bool>& keep) {
  Index kept = 0;
  for (bool k : keep) kept += k ? 1 : 0;
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(kept));
  Matrix positions(kept, 2);
  Vector outcome(kept);
  Matrix X(kept, ds.X.cols());
  std::vector<Matrix> polygons;
  if (ds.has_polygons()) polygons.reserve(static_cast<std::size_t>(kept));
  Index r = 0;
  for (Index i = 0; i < ds.n_units(); ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    ids.push_back(ds.ids[static_cast<std::size_t>(i)]);
    positions.row(r) = ds.positions.row(i);
    outcome(r) = ds.outcome(i);
    X.row(r) = ds.X.row(i);
    if (ds.has_polygons()) polygons.push_back(ds.polygons[static_cast<std::size_t>(i)]);
    ++r;
  }
  SpatialDataset out =
      make_dataset(std::move(ids), std::move(positions), std::move(outcome), ds.outcome_name,
                   std::move(X), ds.columns, std::move(polygons));
  out.metadata = ds.metadata;
  return out;
}

}  // namespace

SpatialDataset apply_transforms(const SpatialDataset& ds, const OrderedPath& path,
                                const std::vector<TransformSpec>& specs) {
  SpatialDataset cur = ds;
  long dropped_units = 0;
  long dropped_channels = 0;

  for (const auto& spec : specs) {
    switch (spec.kind) {
      case TransformSpec::Kind::polynomial: {
        if (spec.degree < 2) throw DomainError("polynomial transform needs degree >= 2");
        if (spec.output.empty()) throw SchemaError("polynomial transform needs an output name");
        const Vector base = cur.column(spec.column);
        Vector powered = base.array().pow(spec.degree).matrix();
        append_column(cur, spec.output, powered);
        break;
      }
      case TransformSpec::Kind::degree_days: {
        if (spec.output.empty()) throw SchemaError("degree-day transform needs an output name");
        std::vector<Index> hours;
        for (Index j = 0; j < cur.n_columns(); ++j)
          if (cur.columns[static_cast<std::size_t>(j)].rfind(spec.column, 0) == 0) hours.push_back(j);
        if (hours.empty())
          throw SchemaError("degree-day transform found no columns with prefix '" + spec.column + "'");
        Vector below(cur.n_units()), above(cur.n_units());
        std::vector<double> temps(hours.size());
        for (Index i = 0; i < cur.n_units(); ++i) {
          for (std::size_t h = 0; h < hours.size(); ++h) temps[h] = cur.X(i, hours[h]);
          const auto dd = degree_days(temps, spec.threshold);
          below(i) = dd.first;
          above(i) = dd.second;
        }
        append_column(cur, spec.output + "_below", below);
        append_column(cur, spec.output + "_above", above);
        break;
      }
      case TransformSpec::Kind::spatial_lag: {
        if (spec.offset < 1) throw DomainError("spatial lag needs offset >= 1");
        if (spec.output.empty()) throw SchemaError("spatial lag transform needs an output name");
        require_new_column(cur, spec.output);
        const Index src = cur.column_index(spec.column);
        const auto k = static_cast<std::size_t>(spec.offset);

        std::unordered_set<std::string> alive(cur.ids.begin(), cur.ids.end());
        const OrderedPath usable = path.restricted_to(alive);
        usable.check_ids_unique();

        std::vector<bool> keep(static_cast<std::size_t>(cur.n_units()), false);
        Vector lagged = Vector::Zero(cur.n_units());
        std::size_t covered = 0;
        for (const auto& channel : usable.channels) {
          covered += channel.size();
          if (channel.size() < k + 1) {
            ++dropped_channels;
            dropped_units += static_cast<long>(channel.size());
            continue;
          }
          dropped_units += static_cast<long>(k);
          for (std::size_t i = k; i < channel.size(); ++i) {
            const Index row = cur.row_of(channel[i]);
            keep[static_cast<std::size_t>(row)] = true;
            lagged(row) = cur.X(cur.row_of(channel[i - k]), src);
          }
        }
        // Units the path never covers have no neighbor to lag from.
        dropped_units += static_cast<long>(cur.ids.size() - covered);

        append_column(cur, spec.output, lagged);
        cur = keep_rows(cur, keep);
        if (cur.n_units() == 0) throw EmptyDesignError("spatial lag dropped every unit");
        break;
      }
    }
  }

  if (dropped_units > 0) cur.metadata["dropped_units"] = std::to_string(dropped_units);
  if (dropped_channels > 0) cur.metadata["dropped_channels"] = std::to_string(dropped_channels);
  return cur;
}

}  // namespace sfd
