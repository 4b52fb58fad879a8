#pragma once

#include <array>
#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/linalg.hpp"
#include "sfd/path.hpp"

namespace sfd {

/**
 * Stacked within-channel differences of outcome and regressors, ready for
 * least squares. order 0 is a levels pass-through (used so levels fits share
 * the same covariance plumbing), order 1 first differences, order 2 double
 * differences. Rows follow the path: channel by channel, front to back, so
 * rows of one channel are contiguous and lag-adjacent.
 */
struct DifferencedDesign {
  int order = 1;
  Vector dy;
  Matrix dX;
  std::vector<std::string> columns;
  std::string outcome_name;
  // Path channel index of each row.
  std::vector<int> channel_of_row;
  // Number of channels that contributed at least one row.
  int n_channels = 0;
  // Units across contributing channels (rows + channels for order 1).
  Index source_units = 0;
  // Ids behind each row, highest path index first. order 0: {id, "", ""},
  // order 1: {i, i-1, ""}, order 2: {i, i-1, i-2}.
  std::vector<std::array<std::string, 3>> pair_ids;
  // Row anchor for distance kernels: the highest-indexed unit's centroid.
  Matrix row_positions;
  std::string direction;

  Index n_rows() const { return dy.size(); }
};

// First differences y_i - y_{i-1} within each channel. Channels shorter than
// 2 contribute nothing; if every channel is too short the design is empty and
// EmptyDesignError is thrown. Path ids must exist in the dataset and be
// unique across the path.
DifferencedDesign spatial_first_difference(const SpatialDataset& ds, const OrderedPath& path);

// Double differences y_i - 2 y_{i-1} + y_{i-2}; channels need 3 units.
DifferencedDesign spatial_double_difference(const SpatialDataset& ds, const OrderedPath& path);

// Levels rows in path traversal order (order 0).
DifferencedDesign levels_design(const SpatialDataset& ds, const OrderedPath& path);

/**
 * Split of the levels covariance between regressors x and unobservables c
 * into the parts removed by first differencing and the part that survives.
 * All blocks are k x m cross-product matrices on per-channel demeaned data:
 *   w1    covariance through the spatial histories (everything but each
 *         channel's last unit),
 *   w3    the difference-difference covariance mapped through the levels
 *         normalization (x'x)(dx'dx)^{-1} dx'dc, the part differencing keeps,
 *   w2    total - w1 - w3, the cross terms,
 *   total = w1 + w2 + w3 exactly.
 * implied_bias_levels = (x'x)^{-1} (w1 + w2) alpha equals the gap between
 * the levels and first-difference slope estimates exactly on single-channel
 * paths when c spans the full unobservable.
 */
struct BiasDecomposition {
  Matrix w1, w2, w3, total;
  Vector implied_bias_levels;
};

// Rows of x and c follow the path traversal order (channel by channel).
// alpha has one loading per c column.
BiasDecomposition decompose_bias(const Matrix& x, const Matrix& c, const Vector& alpha,
                                 const OrderedPath& path);

}  // namespace sfd
