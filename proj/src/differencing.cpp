#include "sfd/differencing.hpp"

#include <unordered_set>

namespace sfd {
namespace {

void validate_path(const SpatialDataset& ds, const OrderedPath& path) {
  path.check_ids_unique();
  for (const auto& channel : path.channels)
    for (const auto& id : channel) ds.row_of(id);
}

DifferencedDesign build(const SpatialDataset& ds, const OrderedPath& path, int order) {
  validate_path(ds, path);

  Index rows = 0;
  for (const auto& channel : path.channels) {
    const auto len = static_cast<Index>(channel.size());
    rows += std::max<Index>(len - order, 0);
  }
  if (rows == 0) {
    if (order > 0)
      throw EmptyDesignError("every channel is shorter than " + std::to_string(order + 1) +
                             " units; nothing to difference");
    throw EmptyDesignError("path covers no units");
  }

  DifferencedDesign d;
  d.order = order;
  d.columns = ds.columns;
  d.outcome_name = ds.outcome_name;
  d.direction = path.direction;
  d.dy.resize(rows);
  d.dX.resize(rows, ds.n_columns());
  d.channel_of_row.reserve(static_cast<std::size_t>(rows));
  d.pair_ids.reserve(static_cast<std::size_t>(rows));
  d.row_positions.resize(rows, 2);

  Index r = 0;
  for (std::size_t ch = 0; ch < path.channels.size(); ++ch) {
    const auto& channel = path.channels[ch];
    if (static_cast<Index>(channel.size()) <= order) continue;
    d.n_channels += 1;
    d.source_units += static_cast<Index>(channel.size());
    for (std::size_t i = static_cast<std::size_t>(order); i < channel.size(); ++i) {
      const Index hi = ds.row_of(channel[i]);
      d.row_positions.row(r) = ds.centroid_of(hi).transpose();
      d.channel_of_row.push_back(static_cast<int>(ch));
      switch (order) {
        case 0:
          d.dy(r) = ds.outcome(hi);
          d.dX.row(r) = ds.X.row(hi);
          d.pair_ids.push_back({channel[i], "", ""});
          break;
        case 1: {
          const Index lo = ds.row_of(channel[i - 1]);
          d.dy(r) = ds.outcome(hi) - ds.outcome(lo);
          d.dX.row(r) = ds.X.row(hi) - ds.X.row(lo);
          d.pair_ids.push_back({channel[i], channel[i - 1], ""});
          break;
        }
        case 2: {
          const Index mid = ds.row_of(channel[i - 1]);
          const Index lo = ds.row_of(channel[i - 2]);
          d.dy(r) = ds.outcome(hi) - 2.0 * ds.outcome(mid) + ds.outcome(lo);
          d.dX.row(r) = ds.X.row(hi) - 2.0 * ds.X.row(mid) + ds.X.row(lo);
          d.pair_ids.push_back({channel[i], channel[i - 1], channel[i - 2]});
          break;
        }
        default:
          throw DomainError("difference order must be 0, 1, or 2");
      }
      ++r;
    }
  }
  return d;
}

}  // namespace

DifferencedDesign spatial_first_difference(const SpatialDataset& ds, const OrderedPath& path) {
  return build(ds, path, 1);
}

DifferencedDesign spatial_double_difference(const SpatialDataset& ds, const OrderedPath& path) {
  return build(ds, path, 2);
}

DifferencedDesign levels_design(const SpatialDataset& ds, const OrderedPath& path) {
  return build(ds, path, 0);
}

BiasDecomposition decompose_bias(const Matrix& x, const Matrix& c, const Vector& alpha,
                                 const OrderedPath& path) {
  const Index n = x.rows();
  const Index k = x.cols();
  const Index m = c.cols();
  if (c.rows() != n) throw DomainError("decompose_bias: x and c row counts differ");
  if (alpha.size() != m) throw DomainError("decompose_bias: alpha length must match c columns");
  if (static_cast<Index>(path.unit_count()) != n)
    throw DomainError("decompose_bias: path covers " + std::to_string(path.unit_count()) +
                      " units, matrices have " + std::to_string(n) + " rows");

  Matrix total = Matrix::Zero(k, m);
  Matrix w1 = Matrix::Zero(k, m);
  Matrix sx = Matrix::Zero(k, k);
  Matrix sdx = Matrix::Zero(k, k);
  Matrix cross_dx_dc = Matrix::Zero(k, m);

  // First pass: per-channel demeaned levels and the raw difference rows.
  Index row0 = 0;
  Index diff_rows = 0;
  for (const auto& channel : path.channels) diff_rows += std::max<Index>(static_cast<Index>(channel.size()) - 1, 0);
  Matrix dx(diff_rows, k), dc(diff_rows, m);
  Index dr = 0;
  for (const auto& channel : path.channels) {
    const auto len = static_cast<Index>(channel.size());
    Matrix xd = x.middleRows(row0, len);
    Matrix cd = c.middleRows(row0, len);
    xd.rowwise() -= xd.colwise().mean();
    cd.rowwise() -= cd.colwise().mean();

    total += xd.transpose() * cd;
    sx += xd.transpose() * xd;
    // Histories are the previous demeaned level; the channel's last unit
    // never serves as a history.
    if (len >= 2) {
      w1 += xd.topRows(len - 1).transpose() * cd.topRows(len - 1);
      dx.middleRows(dr, len - 1) = xd.bottomRows(len - 1) - xd.topRows(len - 1);
      dc.middleRows(dr, len - 1) = cd.bottomRows(len - 1) - cd.topRows(len - 1);
      dr += len - 1;
    }
    row0 += len;
  }

  Matrix w3 = Matrix::Zero(k, m);
  if (diff_rows > 0) {
    // Demean differences across the pooled rows, mirroring the single
    // intercept of the first-difference regression.
    dx.rowwise() -= dx.colwise().mean();
    dc.rowwise() -= dc.colwise().mean();
    sdx = dx.transpose() * dx;
    cross_dx_dc = dx.transpose() * dc;
    // Levels normalization: sx * sdx^{-1} * (dx'dc). A rank-deficient sdx
    // (constant differences) contributes nothing, via the pseudoinverse.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sdx);
    w3 = sx * cod.solve(cross_dx_dc);
  }

  BiasDecomposition out;
  out.w1 = w1;
  out.w3 = w3;
  out.w2 = total - w1 - w3;
  out.total = total;
  Eigen::CompleteOrthogonalDecomposition<Matrix> sx_dec(sx);
  out.implied_bias_levels = sx_dec.solve((out.w1 + out.w2) * alpha);
  return out;
}

}  // namespace sfd
