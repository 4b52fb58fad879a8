#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/differencing.hpp"
#include "sfd/linalg.hpp"
#include "sfd/ols.hpp"
#include "sfd/path.hpp"

namespace sfd {

enum class EstimatorKind { levels, sfd, sdd, robinson };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

/**
 * Standard-error recipe attached to a fit.
 *   ols              classical sigma^2 (X'X)^{-1}
 *   hc               heteroskedasticity-robust sandwich, no small-sample factor
 *   newey_west       within-channel Bartlett kernel up to `lag` (default 2)
 *   conley           planar Bartlett product kernel, cutoffs required
 *   cluster          one cluster per channel, needs >= 2 channels
 *   bootstrap        iid row resampling, `replications` >= 100
 *   block_bootstrap  whole-channel resampling, channel count preserved
 */
struct SEMethod {
  enum class Kind { ols, hc, newey_west, conley, cluster, bootstrap, block_bootstrap };
  Kind kind = Kind::newey_west;
  int lag = 2;
  double cutoff_x = 0.0;
  double cutoff_y = 0.0;
  int replications = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  std::string label() const;

  // Accepts "ols", "hc", "newey-west", "newey-west:L", "conley:CX,CY",
  // "cluster", "bootstrap[:B[:SEED]]", "block-bootstrap[:B[:SEED]]".
  // Underscores work in place of hyphens. Throws DomainError on anything else.
  static SEMethod parse(const std::string& text);

  static SEMethod ols() { return {Kind::ols}; }
  static SEMethod hc() { return {Kind::hc}; }
  static SEMethod newey_west(int lag = 2) { return {Kind::newey_west, lag}; }
  static SEMethod conley(double cx, double cy) { return {Kind::conley, 2, cx, cy}; }
  static SEMethod cluster() { return {Kind::cluster}; }
  static SEMethod bootstrap(int b, std::uint64_t seed) {
    SEMethod m{Kind::bootstrap};
    m.replications = b;
    m.seed = seed;
    return m;
  }
  static SEMethod block_bootstrap(int b, std::uint64_t seed) {
    SEMethod m{Kind::block_bootstrap};
    m.replications = b;
    m.seed = seed;
    return m;
  }
};

/**
 * A fitted regression. Coefficients are ordered intercept first, then the
 * design columns. vcov is symmetric positive semidefinite and matches the
 * coefficient order. r_squared is measured on the data the regression
 * actually ran on (differenced rows for differenced fits).
 */
struct FitResult {
  std::vector<std::string> coef_names;
  Vector coefficients;
  Matrix vcov;
  Vector residuals;
  Index n_obs = 0;
  double r_squared = 0.0;
  EstimatorKind kind = EstimatorKind::levels;
  std::string se_label;
  std::string direction;
  int n_channels = 0;
  std::vector<std::string> warnings;

  double se(Index i) const { return std::sqrt(vcov(i, i)); }
  Index coef_index(const std::string& name) const;
  double coef(const std::string& name) const { return coefficients(coef_index(name)); }
};

// Plain least squares with optional intercept; vcov is the classical
// sigma^2 (X'X)^{-1}. Column names label the collinearity report.
FitResult ols_fit(const Matrix& x, const Vector& y, const std::vector<std::string>& names,
                  bool intercept);

// Composes differencing, least squares with intercept, and the requested
// covariance. levels fits run on the units the path covers, in path order,
// so sequence-aware covariances stay defined. kind == robinson is rejected
// here; call robinson_fit.
FitResult fit(const SpatialDataset& ds, const OrderedPath& path, EstimatorKind kind,
              const SEMethod& se);

// Same engine on a prebuilt design, optionally restricted to a subset of
// design columns (empty = all).
FitResult fit_design(const DifferencedDesign& d, const SEMethod& se,
                     const std::vector<std::string>& columns = {});

// Local-trend comparator. Every unit's trend is the mean over the units
// within `h` index positions on its channel (window truncated at channel
// ends, the unit itself included). Slopes come from the residual-on-residual
// regression without intercept; the reported intercept is the mean of the
// outcome residuals. All path units stay in the sample. `columns` empty
// means all regressors.
FitResult robinson_fit(const SpatialDataset& ds, const OrderedPath& path, int h,
                       const std::vector<std::string>& columns = {});

// Window means used by robinson_fit, exposed for direct checks: for each
// channel position i, the mean of values at positions [i-h, i+h] clamped to
// the channel.
Vector local_window_means(const Vector& values, const std::vector<Index>& channel_lengths, int h);

}  // namespace sfd
