#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfd/differencing.hpp"
#include "sfd/linalg.hpp"

namespace sfd {

// All vcov builders take the regression matrix as it was solved (intercept
// column included) and the residuals from that solve. Optional `warnings`
// collects diagnostics without interrupting the fit.

// Classical sigma^2 (X'X)^{-1} with sigma^2 = rss / (n - k).
Matrix ols_vcov(const Matrix& x, const Vector& residuals);

// Sandwich with meat X' diag(e^2) X, no small-sample scaling.
Matrix hc_vcov(const Matrix& x, const Vector& residuals);

/**
 * Bartlett-kernel HAC along the ordering, weight 1 - l/(lag+1) at distance
 * l. Cross products never span channels. Channels shorter than lag + 1
 * truncate silently per pair, but if every channel is that short a warning
 * records that the requested lag was never fully used.
 */
Matrix newey_west_vcov(const Matrix& x, const Vector& residuals,
                       const std::vector<int>& channel_of_row, int lag,
                       std::vector<std::string>* warnings = nullptr);

/**
 * Planar HAC: pairs within the cutoff rectangle get the product Bartlett
 * weight (1 - |dx|/cutoff_x)(1 - |dy|/cutoff_y) regardless of channel.
 * `positions` holds one planar coordinate per row. Cutoffs small enough
 * that no cross-row pair qualifies reduce this to hc_vcov; a warning says
 * so.
 */
Matrix conley_vcov(const Matrix& x, const Vector& residuals, const Matrix& positions,
                   double cutoff_x, double cutoff_y,
                   std::vector<std::string>* warnings = nullptr);

// Cluster-robust with one cluster per channel and the usual
// G/(G-1) * (n-1)/(n-k) small-sample factor. Requires >= 2 clusters;
// throws DomainError advising newey_west otherwise.
Matrix cluster_vcov(const Matrix& x, const Vector& residuals,
                    const std::vector<int>& channel_of_row, int n_clusters);

/**
 * Nonparametric covariance of the coefficient vector. by_channel == false
 * resamples rows iid with replacement; by_channel == true resamples whole
 * channels, keeping the channel count. Degenerate draws (rank-deficient
 * resample) are redrawn with a fresh derived stream, capped at 10x the
 * replication count; hitting the cap throws ComputationError. Replications
 * must be >= 100.
 */
Matrix bootstrap_vcov(const Matrix& x, const Vector& y, int replications, std::uint64_t seed,
                      bool by_channel, const std::vector<int>& channel_of_row,
                      std::vector<std::string>* warnings = nullptr);

/**
 * Difference-based variance for a first-differenced design: s2 is the mean
 * squared differenced residual, omega the slope-block Gram matrix of the
 * differenced regressors divided by the unit count, and
 * vcov = (1.5 * s2 / n_units) * omega^{-1}. The slope block only; the
 * intercept is not covered. finite_spacing_caveat is always true: s2
 * estimates twice the noise variance unless neighbor spacing is
 * asymptotically dense, and the reported vcov relies on the same doubling
 * inside omega cancelling it.
 */
struct YatchewVariance {
  double s2 = 0.0;
  Matrix omega;
  Matrix vcov;
  Index n_units = 0;
  bool finite_spacing_caveat = true;
};

YatchewVariance yatchew_variance(const DifferencedDesign& d);

}  // namespace sfd
