#include "sfd/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfd/geometry.hpp"

namespace sfd {
namespace {

constexpr double kLatticeTol = 1e-9;

std::vector<Index> sorted_units(const SpatialDataset& ds, const std::vector<Index>& rows,
                                const Vector& key) {
  std::vector<Index> order = rows;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return ds.ids[static_cast<std::size_t>(a)] < ds.ids[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<std::string> rows_to_ids(const SpatialDataset& ds, const std::vector<Index>& rows) {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (Index r : rows) ids.push_back(ds.ids[static_cast<std::size_t>(r)]);
  return ids;
}

// Groups sorted coordinate values into clusters whose members sit within
// kLatticeTol of the cluster representative (its first value).
std::vector<double> cluster_values(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> reps;
  for (double v : values) {
    if (reps.empty() || v - reps.back() > kLatticeTol) reps.push_back(v);
  }
  return reps;
}

// A lattice axis: consecutive distinct values are integer multiples of the
// smallest gap (allows missing rows). Fewer than 3 distinct values is
// trivially regular.
bool is_lattice_axis(const std::vector<double>& reps) {
  if (reps.size() < 3) return true;
  double base = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < reps.size(); ++i) base = std::min(base, reps[i] - reps[i - 1]);
  if (!(base > kLatticeTol)) return false;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const double ratio = (reps[i] - reps[i - 1]) / base;
    if (std::abs(ratio - std::round(ratio)) > 1e-6) return false;
  }
  return true;
}

std::size_t cluster_of(const std::vector<double>& reps, double v) {
  const auto it = std::upper_bound(reps.begin(), reps.end(), v);
  std::size_t j = (it == reps.begin()) ? 0 : static_cast<std::size_t>(it - reps.begin() - 1);
  if (j + 1 < reps.size() && std::abs(reps[j + 1] - v) < std::abs(reps[j] - v)) ++j;
  return j;
}

std::string format_angle(double theta_deg) {
  std::ostringstream os;
  os << "theta=" << theta_deg;
  return os.str();
}

}  // namespace

OrderedPath order_1d(const SpatialDataset& ds, char axis) {
  if (axis != 'x' && axis != 'y') throw DomainError("order_1d: axis must be 'x' or 'y'");
  const Index col = axis == 'x' ? 0 : 1;
  std::vector<Index> rows(static_cast<std::size_t>(ds.n_units()));
  for (Index i = 0; i < ds.n_units(); ++i) rows[static_cast<std::size_t>(i)] = i;
  const Vector key = ds.positions.col(col);

  OrderedPath path;
  path.direction = std::string(1, axis);
  path.channels.push_back(rows_to_ids(ds, sorted_units(ds, rows, key)));
  return path;
}

OrderedPath order_grid(const SpatialDataset& ds, GridDirection direction) {
  const bool we = direction == GridDirection::west_east;
  // The cross axis induces the channels: y for west-east, x for north-south.
  const Index cross = we ? 1 : 0;
  const Index along = we ? 0 : 1;

  std::vector<double> cross_values(static_cast<std::size_t>(ds.n_units()));
  for (Index i = 0; i < ds.n_units(); ++i) cross_values[static_cast<std::size_t>(i)] = ds.positions(i, cross);
  const std::vector<double> reps = cluster_values(cross_values);
  if (!is_lattice_axis(reps))
    throw StructureError(
        "positions do not form a regular lattice on the channel axis; "
        "use assign_channels for irregular data");
  for (Index i = 0; i < ds.n_units(); ++i) {
    const double v = ds.positions(i, cross);
    if (std::abs(v - reps[cluster_of(reps, v)]) > kLatticeTol)
      throw StructureError(
          "unit '" + ds.ids[static_cast<std::size_t>(i)] +
          "' is not on a lattice line; use assign_channels for irregular data");
  }

  std::vector<std::vector<Index>> groups(reps.size());
  for (Index i = 0; i < ds.n_units(); ++i)
    groups[cluster_of(reps, ds.positions(i, cross))].push_back(i);

  // west_east walks by x ascending; north_south walks by y descending,
  // which is ascending in -y.
  Vector key = ds.positions.col(along);
  if (!we) key = -key;

  OrderedPath path;
  path.direction = we ? "WE" : "NS";
  if (we) {
    // Channels north to south: distinct y descending.
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
      if (it->empty()) continue;
      path.channels.push_back(rows_to_ids(ds, sorted_units(ds, *it, key)));
    }
  } else {
    // Channels west to east: distinct x ascending.
    for (const auto& g : groups) {
      if (g.empty()) continue;
      path.channels.push_back(rows_to_ids(ds, sorted_units(ds, g, key)));
    }
  }
  return path;
}

Eigen::Vector2d dataset_centroid(const SpatialDataset& ds) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (Index i = 0; i < ds.n_units(); ++i) sum += ds.centroid_of(i);
  return sum / static_cast<double>(ds.n_units());
}

double default_channel_width(const SpatialDataset& ds) {
  if (!ds.has_polygons()) throw DomainError("default_channel_width: dataset has no polygons");
  double total = 0.0;
  Index counted = 0;
  for (Index i = 0; i < ds.n_units(); ++i) {
    const Matrix& ring = ds.polygons[static_cast<std::size_t>(i)];
    if (ring.rows() < 3) continue;
    const auto [lo, hi] = column_extent(ring, 1);
    total += hi - lo;
    ++counted;
  }
  if (counted == 0) throw DomainError("default_channel_width: no unit has a polygon");
  const double width = total / static_cast<double>(counted);
  if (!(width > 0.0)) throw DomainError("default_channel_width: mean north-south extent is zero");
  return width;
}

OrderedPath assign_channels(const SpatialDataset& ds, double width, double theta_deg) {
  if (!(width > 0.0)) throw DomainError("assign_channels: width must be positive");
  if (!std::isfinite(theta_deg)) throw DomainError("assign_channels: theta must be finite");

  const Eigen::Vector2d pivot = dataset_centroid(ds);
  const double angle = -theta_deg;

  const Index n = ds.n_units();
  Matrix centroids(n, 2);
  for (Index i = 0; i < n; ++i) centroids.row(i) = ds.centroid_of(i).transpose();
  const Matrix rot_centroids = rotate_points(centroids, pivot, angle);

  Vector ymin(n), ymax(n);
  for (Index i = 0; i < n; ++i) {
    if (ds.has_polygons() && ds.polygons[static_cast<std::size_t>(i)].rows() >= 3) {
      const Matrix ring = rotate_points(ds.polygons[static_cast<std::size_t>(i)], pivot, angle);
      const auto [lo, hi] = column_extent(ring, 1);
      ymin(i) = lo;
      ymax(i) = hi;
    } else {
      const Matrix pt = rotate_points(ds.positions.row(i), pivot, angle);
      ymin(i) = pt(0, 1);
      ymax(i) = pt(0, 1);
    }
  }

  const double top = ymax.maxCoeff();
  const double bottom = ymin.minCoeff();
  // floor + 1 bands guarantee the southernmost unit falls strictly above the
  // last band's open bottom edge even when the extent divides evenly.
  const auto n_bands = static_cast<Index>(std::floor((top - bottom) / width)) + 1;

  std::vector<bool> assigned(static_cast<std::size_t>(n), false);
  OrderedPath path;
  path.direction = format_angle(theta_deg);
  path.channel_width = width;

  for (Index b = 0; b < n_bands; ++b) {
    const double band_top = top - static_cast<double>(b) * width;
    const double band_bottom = band_top - width;
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i) {
      if (assigned[static_cast<std::size_t>(i)]) continue;
      // Point units have ymin == ymax and reduce to band_bottom < y <= band_top.
      if (ymin(i) <= band_top && ymax(i) > band_bottom) {
        members.push_back(i);
        assigned[static_cast<std::size_t>(i)] = true;
      }
    }
    if (members.empty()) continue;
    path.channels.push_back(rows_to_ids(ds, sorted_units(ds, members, rot_centroids.col(0))));
  }
  return path;
}

}  // namespace sfd
