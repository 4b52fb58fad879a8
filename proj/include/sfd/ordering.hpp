#pragma once

#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/path.hpp"

namespace sfd {

// Single channel walking the whole sample along one coordinate axis
// ('x' or 'y'), ascending, ties broken by id.
OrderedPath order_1d(const SpatialDataset& ds, char axis);

enum class GridDirection { west_east, north_south };

// Lattice traversal. west_east: one channel per distinct y, walked by x
// ascending, channels listed north to south. north_south: one channel per
// distinct x, walked by y descending, channels listed west to east.
// Coordinates match lattice lines at absolute tolerance 1e-9; the axis that
// defines the channels must have its distinct values spaced at integer
// multiples of the smallest gap (rows may be missing, not irregular).
// Irregular positions raise StructureError advising assign_channels.
OrderedPath order_grid(const SpatialDataset& ds, GridDirection direction);

// Band sampling for irregular maps. Coordinates (vertices and centroids) are
// rotated by -theta_deg about the dataset centroid (the mean of unit
// centroids); horizontal bands of `width` tile the rotated y extent from
// north (max y) downward. A unit joins a band when its rotated y range
// [ymin, ymax] satisfies ymin <= band_top and ymax > band_bottom (bands are
// closed on top, open at the bottom, so a shared boundary belongs to the
// southern band and the northernmost unit is always captured). A unit
// spanning several bands goes to the northernmost one it touches. Within a
// band, units are ordered by rotated centroid x ascending, ties by id.
// Empty bands are dropped. direction is labelled "theta=<deg>".
OrderedPath assign_channels(const SpatialDataset& ds, double width, double theta_deg);

// Default band width: the mean north-south vertex extent over units that
// have polygons. DomainError when no unit has one.
double default_channel_width(const SpatialDataset& ds);

// Mean of unit centroids; the rotation pivot used by assign_channels.
Eigen::Vector2d dataset_centroid(const SpatialDataset& ds);

}  // namespace sfd
