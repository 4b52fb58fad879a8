#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sfd/errors.hpp"

namespace sfd {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

// Bartlett taper: weight 1 - l/(L+1) for lag l, zero beyond L.
template <class Scalar>
Scalar bartlett_weight(int lag, int max_lag) {
  if (lag < 0) lag = -lag;
  if (lag > max_lag) return Scalar(0);
  return Scalar(1) - Scalar(lag) / Scalar(max_lag + 1);
}

// Linear-interpolation quantile on a copy of the data (R type 7).
// q must lie in [0, 1]; the input must be non-empty.
template <class Scalar>
Scalar quantile(std::vector<Scalar> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw DomainError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return static_cast<Scalar>((1.0 - frac) * values[lo] + frac * values[lo + 1]);
}

template <class Scalar>
Scalar mean_of(const std::vector<Scalar>& v) {
  if (v.empty()) throw DomainError("mean_of: empty sample");
  Scalar s = 0;
  for (Scalar x : v) s += x;
  return s / static_cast<Scalar>(v.size());
}

// Unbiased sample variance (n - 1 denominator); zero for n < 2.
template <class Scalar>
Scalar variance_of(const std::vector<Scalar>& v) {
  if (v.size() < 2) return Scalar(0);
  const Scalar m = mean_of(v);
  Scalar s = 0;
  for (Scalar x : v) s += (x - m) * (x - m);
  return s / static_cast<Scalar>(v.size() - 1);
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Two-sided p-value for a normal z statistic.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace sfd
