#pragma once

#include <cmath>
#include <numbers>

#include "sfd/errors.hpp"
#include "sfd/linalg.hpp"

namespace sfd {

template <class Scalar>
Scalar deg_to_rad(Scalar degrees) {
  return degrees * std::numbers::pi_v<Scalar> / Scalar(180);
}

// Rotates each row of an n x 2 point matrix by `degrees` counterclockwise
// about `pivot`. degrees == 0 is an exact identity so that grid coordinates
// survive a zero-angle pass bit-for-bit.
template <class Derived, class PivotDerived>
MatrixX<typename Derived::Scalar> rotate_points(const Eigen::MatrixBase<Derived>& points,
                                                const Eigen::MatrixBase<PivotDerived>& pivot,
                                                typename Derived::Scalar degrees) {
  using Scalar = typename Derived::Scalar;
  if (points.cols() != 2) throw DomainError("rotate_points: expected an n x 2 matrix");
  if (degrees == Scalar(0)) return points;
  const Scalar a = deg_to_rad(degrees);
  const Scalar c = std::cos(a);
  const Scalar s = std::sin(a);
  Eigen::Matrix<Scalar, 2, 2> rot;
  rot << c, -s, s, c;
  MatrixX<Scalar> centered = points.rowwise() - pivot.transpose();
  MatrixX<Scalar> out = centered * rot.transpose();
  out.rowwise() += pivot.transpose();
  return out;
}

// Signed shoelace area of a polygon ring (rows are vertices in order,
// the closing edge is implicit). Positive for counterclockwise rings.
template <class Derived>
typename Derived::Scalar polygon_area(const Eigen::MatrixBase<Derived>& ring) {
  using Scalar = typename Derived::Scalar;
  const Index n = ring.rows();
  if (n < 3) throw IntegrityError("polygon_area: ring needs at least 3 vertices");
  Scalar twice = 0;
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    twice += ring(i, 0) * ring(j, 1) - ring(j, 0) * ring(i, 1);
  }
  return twice / Scalar(2);
}

// Area-weighted (shoelace) centroid. Falls back to the vertex mean when the
// ring is degenerate (|area| below 1e-12 times the squared bounding span),
// which covers collinear rings.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> polygon_centroid(const Eigen::MatrixBase<Derived>& ring) {
  using Scalar = typename Derived::Scalar;
  const Index n = ring.rows();
  if (n < 3) throw IntegrityError("polygon_centroid: ring needs at least 3 vertices");
  const Scalar area = polygon_area(ring);
  const Scalar span = (ring.colwise().maxCoeff() - ring.colwise().minCoeff()).norm();
  if (std::abs(area) <= Scalar(1e-12) * std::max(span * span, Scalar(1))) {
    return ring.colwise().mean().transpose();
  }
  Scalar cx = 0, cy = 0;
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    const Scalar cross = ring(i, 0) * ring(j, 1) - ring(j, 0) * ring(i, 1);
    cx += (ring(i, 0) + ring(j, 0)) * cross;
    cy += (ring(i, 1) + ring(j, 1)) * cross;
  }
  Eigen::Matrix<Scalar, 2, 1> c;
  c << cx / (Scalar(6) * area), cy / (Scalar(6) * area);
  return c;
}

template <class Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> column_extent(
    const Eigen::MatrixBase<Derived>& ring, Index col) {
  return {ring.col(col).minCoeff(), ring.col(col).maxCoeff()};
}

}  // namespace sfd
