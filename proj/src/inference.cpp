#include "sfd/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/ols.hpp"
#include "sfd/rng.hpp"

namespace sfd {

namespace {

// (X'X)^{-1}; the fit that produced the residuals already verified rank.
Matrix bread(const Matrix& x) {
  Eigen::FullPivLU<Matrix> lu(x.transpose() * x);
  if (!lu.isInvertible()) {
    throw CollinearityError("covariance undefined: regressor cross-product is singular");
  }
  return lu.inverse();
}

// Row i holds x_i * e_i.
Matrix score_rows(const Matrix& x, const Vector& residuals) {
  return x.array().colwise() * residuals.array();
}

std::vector<std::vector<Index>> rows_by_channel(const std::vector<int>& channel_of_row) {
  std::vector<std::vector<Index>> groups;
  std::vector<int> seen;
  for (Index i = 0; i < static_cast<Index>(channel_of_row.size()); ++i) {
    const int c = channel_of_row[static_cast<std::size_t>(i)];
    auto it = std::find(seen.begin(), seen.end(), c);
    std::size_t g;
    if (it == seen.end()) {
      seen.push_back(c);
      groups.emplace_back();
      g = groups.size() - 1;
    } else {
      g = static_cast<std::size_t>(it - seen.begin());
    }
    groups[g].push_back(i);
  }
  return groups;
}

void check_rows(const Matrix& x, const Vector& residuals) {
  if (x.rows() != residuals.size()) {
    throw DomainError("design and residual lengths differ");
  }
  if (x.rows() <= x.cols()) {
    throw DomainError("covariance needs more rows than coefficients");
  }
}

}  // namespace

Matrix ols_vcov(const Matrix& x, const Vector& residuals) {
  check_rows(x, residuals);
  const double sigma2 =
      residuals.squaredNorm() / static_cast<double>(x.rows() - x.cols());
  return sigma2 * bread(x);
}

Matrix hc_vcov(const Matrix& x, const Vector& residuals) {
  check_rows(x, residuals);
  const Matrix s = score_rows(x, residuals);
  const Matrix b = bread(x);
  return symmetrized(b * (s.transpose() * s) * b);
}

Matrix newey_west_vcov(const Matrix& x, const Vector& residuals,
                       const std::vector<int>& channel_of_row, int lag,
                       std::vector<std::string>* warnings) {
  check_rows(x, residuals);
  if (lag < 1) throw DomainError("newey_west lag must be >= 1");
  if (static_cast<Index>(channel_of_row.size()) != x.rows()) {
    throw DomainError("channel assignment does not match design rows");
  }
  const Matrix s = score_rows(x, residuals);
  Matrix meat = s.transpose() * s;
  const auto groups = rows_by_channel(channel_of_row);
  Index longest = 0;
  for (const auto& g : groups) longest = std::max(longest, static_cast<Index>(g.size()));
  for (int l = 1; l <= lag; ++l) {
    const double w = bartlett_weight<double>(l, lag);
    for (const auto& g : groups) {
      for (std::size_t i = static_cast<std::size_t>(l); i < g.size(); ++i) {
        const Matrix cross =
            s.row(g[i]).transpose() * s.row(g[i - static_cast<std::size_t>(l)]);
        meat += w * (cross + cross.transpose());
      }
    }
  }
  if (longest <= lag && warnings != nullptr) {
    std::ostringstream msg;
    msg << "newey_west lag " << lag << " exceeds every channel; longest channel has "
        << longest << " rows, so the kernel was truncated";
    warnings->push_back(msg.str());
  }
  const Matrix b = bread(x);
  return symmetrized(b * meat * b);
}

Matrix conley_vcov(const Matrix& x, const Vector& residuals, const Matrix& positions,
                   double cutoff_x, double cutoff_y, std::vector<std::string>* warnings) {
  check_rows(x, residuals);
  if (cutoff_x <= 0.0 || cutoff_y <= 0.0) {
    throw DomainError("conley cutoffs must be positive");
  }
  if (positions.rows() != x.rows() || positions.cols() != 2) {
    throw DomainError("conley needs one planar position per design row");
  }
  const Matrix s = score_rows(x, residuals);
  Matrix meat = s.transpose() * s;
  bool any_pair = false;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = i + 1; j < x.rows(); ++j) {
      const double dx = std::abs(positions(i, 0) - positions(j, 0));
      const double dy = std::abs(positions(i, 1) - positions(j, 1));
      if (dx >= cutoff_x || dy >= cutoff_y) continue;
      any_pair = true;
      const double w = (1.0 - dx / cutoff_x) * (1.0 - dy / cutoff_y);
      const Matrix cross = s.row(i).transpose() * s.row(j);
      meat += w * (cross + cross.transpose());
    }
  }
  if (!any_pair && warnings != nullptr) {
    warnings->push_back(
        "conley cutoffs admit no cross-row pairs; result equals the "
        "heteroskedasticity-robust covariance");
  }
  const Matrix b = bread(x);
  return symmetrized(b * meat * b);
}

Matrix cluster_vcov(const Matrix& x, const Vector& residuals,
                    const std::vector<int>& channel_of_row, int n_clusters) {
  check_rows(x, residuals);
  if (static_cast<Index>(channel_of_row.size()) != x.rows()) {
    throw DomainError("channel assignment does not match design rows");
  }
  if (n_clusters < 2) {
    throw DomainError(
        "cluster covariance needs at least 2 channels; with a single channel "
        "use newey_west instead");
  }
  const Matrix s = score_rows(x, residuals);
  const auto groups = rows_by_channel(channel_of_row);
  Matrix meat = Matrix::Zero(x.cols(), x.cols());
  for (const auto& g : groups) {
    Vector sum = Vector::Zero(x.cols());
    for (Index r : g) sum += s.row(r).transpose();
    meat += sum * sum.transpose();
  }
  const double n = static_cast<double>(x.rows());
  const double k = static_cast<double>(x.cols());
  const double gcount = static_cast<double>(n_clusters);
  const double factor = gcount / (gcount - 1.0) * (n - 1.0) / (n - k);
  const Matrix b = bread(x);
  return symmetrized(factor * b * meat * b);
}

Matrix bootstrap_vcov(const Matrix& x, const Vector& y, int replications, std::uint64_t seed,
                      bool by_channel, const std::vector<int>& channel_of_row,
                      std::vector<std::string>* warnings) {
  if (x.rows() != y.size()) throw DomainError("design and outcome lengths differ");
  if (replications < 100) throw DomainError("bootstrap needs at least 100 replications");
  if (by_channel && static_cast<Index>(channel_of_row.size()) != x.rows()) {
    throw DomainError("channel assignment does not match design rows");
  }
  const Index n = x.rows();
  const Index k = x.cols();
  std::vector<std::vector<Index>> groups;
  if (by_channel) {
    groups = rows_by_channel(channel_of_row);
    if (groups.size() < 2) {
      throw DomainError(
          "block bootstrap needs at least 2 channels; with a single channel "
          "use the iid bootstrap instead");
    }
  }

  Matrix draws(replications, k);
  const std::uint64_t max_attempts = 10ull * static_cast<std::uint64_t>(replications);
  std::uint64_t attempt = 0;
  int collected = 0;
  int redraws = 0;
  while (collected < replications) {
    if (attempt >= max_attempts) {
      throw ComputationError(
          "bootstrap exceeded the redraw budget: too many degenerate resamples");
    }
    auto gen = derived_stream(seed, attempt);
    ++attempt;
    std::vector<Index> rows;
    if (by_channel) {
      std::uniform_int_distribution<std::size_t> pick(0, groups.size() - 1);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& chosen = groups[pick(gen)];
        rows.insert(rows.end(), chosen.begin(), chosen.end());
      }
    } else {
      std::uniform_int_distribution<Index> pick(0, n - 1);
      rows.resize(static_cast<std::size_t>(n));
      for (auto& r : rows) r = pick(gen);
    }
    Matrix xb(static_cast<Index>(rows.size()), k);
    Vector yb(static_cast<Index>(rows.size()));
    for (Index i = 0; i < static_cast<Index>(rows.size()); ++i) {
      xb.row(i) = x.row(rows[static_cast<std::size_t>(i)]);
      yb(i) = y(rows[static_cast<std::size_t>(i)]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(xb);
    if (qr.rank() < k || xb.rows() <= k) {
      ++redraws;
      continue;
    }
    draws.row(collected) = qr.solve(yb).transpose();
    ++collected;
  }
  if (redraws > 0 && warnings != nullptr) {
    std::ostringstream msg;
    msg << redraws << " degenerate bootstrap resamples were redrawn";
    warnings->push_back(msg.str());
  }
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Matrix centered = draws.rowwise() - mean;
  return symmetrized(centered.transpose() * centered /
                     static_cast<double>(replications - 1));
}

YatchewVariance yatchew_variance(const DifferencedDesign& d) {
  if (d.order != 1) {
    throw DomainError("difference-based variance is defined for first differences only");
  }
  if (d.n_rows() <= d.dX.cols() + 1) {
    throw DomainError("difference-based variance needs more rows than coefficients");
  }
  std::vector<std::string> names;
  names.reserve(d.columns.size() + 1);
  names.emplace_back("(intercept)");
  names.insert(names.end(), d.columns.begin(), d.columns.end());
  const auto sol = solve_least_squares(with_intercept(d.dX), d.dy, names, true);
  YatchewVariance out;
  out.n_units = d.n_rows() + d.n_channels;
  const double n = static_cast<double>(out.n_units);
  out.s2 = sol.residuals.squaredNorm() / n;
  out.omega = (d.dX.transpose() * d.dX) / n;
  Eigen::FullPivLU<Matrix> lu(out.omega);
  if (!lu.isInvertible()) {
    throw CollinearityError("difference-based variance undefined: differenced "
                            "regressors are collinear");
  }
  out.vcov = symmetrized((1.5 * out.s2 / n) * lu.inverse());
  out.finite_spacing_caveat = true;
  return out;
}

}  // namespace sfd
