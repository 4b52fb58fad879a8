#pragma once

#include <string>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/linalg.hpp"

namespace sfd {

template <class Scalar>
struct OlsSolution {
  VectorX<Scalar> coef;
  VectorX<Scalar> fitted;
  VectorX<Scalar> residuals;
  Scalar rss = 0;
  Scalar r_squared = 0;
  Index rank = 0;
};

// Relative singular-value cutoff below which columns count as dependent.
inline constexpr double kRankTol = 1e-10;

namespace detail {

// Names the columns a rank-revealing QR pivots past the numerical rank.
template <class Scalar>
std::string dependent_column_report(const MatrixX<Scalar>& a, Index rank,
                                    const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(a);
  const auto perm = qr.colsPermutation().indices();
  std::string report;
  for (Index i = rank; i < a.cols(); ++i) {
    const auto col = static_cast<std::size_t>(perm(i));
    if (!report.empty()) report += ", ";
    report += col < names.size() ? names[col] : "column " + std::to_string(perm(i));
  }
  return report;
}

}  // namespace detail

/**
 * Least squares through a QR decomposition (never the normal equations).
 * `a` already contains any intercept column; `names` labels columns for the
 * collinearity report. Throws CollinearityError when the smallest singular
 * value falls below kRankTol times the largest, and DomainError when there
 * are fewer rows than columns. r_squared compares against the mean of y
 * when `about_mean` is set, against zero otherwise.
 */
template <class Scalar>
OlsSolution<Scalar> solve_least_squares(const MatrixX<Scalar>& a, const VectorX<Scalar>& y,
                                        const std::vector<std::string>& names, bool about_mean) {
  if (a.rows() != y.size()) throw DomainError("least squares: row count mismatch");
  if (a.rows() < a.cols())
    throw DomainError("least squares: " + std::to_string(a.rows()) + " rows cannot identify " +
                      std::to_string(a.cols()) + " coefficients");

  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a);
  const auto& sv = svd.singularValues();
  const Scalar largest = sv(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > Scalar(kRankTol) * largest) ++rank;
  if (rank < a.cols())
    throw CollinearityError("design matrix is rank deficient; dependent columns: " +
                            detail::dependent_column_report(a, rank, names));

  OlsSolution<Scalar> s;
  s.rank = rank;
  s.coef = Eigen::HouseholderQR<MatrixX<Scalar>>(a).solve(y);
  s.fitted = a * s.coef;
  s.residuals = y - s.fitted;
  s.rss = s.residuals.squaredNorm();
  const Scalar tss = about_mean ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
  s.r_squared = tss > Scalar(0) ? Scalar(1) - s.rss / tss : Scalar(1);
  return s;
}

template <class Scalar>
MatrixX<Scalar> with_intercept(const MatrixX<Scalar>& x) {
  MatrixX<Scalar> a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

}  // namespace sfd
