#pragma once

#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/estimation.hpp"
#include "sfd/linalg.hpp"
#include "sfd/path.hpp"

namespace sfd {

// Controls that enter and leave specifications together.
struct CovariateGroup {
  std::string name;
  std::vector<std::string> members;
};

struct SweepEntry {
  double axis_value = 0.0;
  std::string spec_id;
  EstimatorKind kind = EstimatorKind::sfd;
  bool ok = false;
  std::string reason;
  std::vector<std::string> coef_names;
  Vector coefficients;
  Vector ses;
  Index n_obs = 0;
  int n_channels = 0;
};

// Spread of one coefficient across the successful entries of one estimator
// kind. cov = sd/|mean|, with cov_guarded set (and cov zeroed) when |mean|
// is below 1e-8.
struct DispersionStats {
  std::string kind_label;
  std::string coef;
  Index count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
  double cov = 0.0;
  bool cov_guarded = false;
};

// Distribution of the focal coefficient across specifications.
struct FocalSummary {
  std::string kind_label;
  std::string coef;
  Index count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double variance = 0.0;
};

struct SweepResult {
  std::string axis_name;
  std::vector<SweepEntry> entries;
  std::vector<DispersionStats> dispersion;
  std::vector<FocalSummary> focal;

  const SweepEntry& entry_at(double axis_value) const;
  const DispersionStats& dispersion_for(const std::string& kind_label,
                                        const std::string& coef) const;
  const FocalSummary& focal_for(const std::string& kind_label) const;
};

// 1-degree steps over [-89, 90]; theta and theta + 180 give the same bands,
// so this range covers every distinct direction once.
std::vector<double> full_rotation_grid();
// {-60, -30, 0, 30, 60, 90}, small enough for routine test runs.
std::vector<double> coarse_rotation_grid();

/**
 * For each angle: assign channels of the given width at that rotation, fit
 * first differences with `se`, and record coefficients and standard errors.
 * Angles must lie in [-89, 90]. An angle whose design fails is recorded
 * with its reason and skipped in the dispersion statistics.
 */
SweepResult rotation_sweep(const SpatialDataset& ds, double width,
                           const std::vector<double>& thetas, const SEMethod& se,
                           const std::vector<std::string>& columns = {});

/**
 * Fits focal + every subset of the control groups (2^G specifications per
 * estimator kind; G <= 16) and summarizes the distribution of the first
 * focal member's coefficient per kind. Groups must be disjoint and name
 * existing regressors; kinds are limited to levels and sfd. Rank-deficient
 * specifications are recorded as missing.
 */
SweepResult extreme_bounds(const SpatialDataset& ds, const OrderedPath& path,
                           const CovariateGroup& focal,
                           const std::vector<CovariateGroup>& controls,
                           const std::vector<EstimatorKind>& kinds, const SEMethod& se);

struct CoefficientGap {
  std::string name;
  double sfd_estimate = 0.0;
  double sfd_se = 0.0;
  double sdd_estimate = 0.0;
  double sdd_se = 0.0;
  double gap = 0.0;
  double combined_se = 0.0;
  bool inside_sfd_ci = false;
};

struct SddCheckResult {
  FitResult sfd;
  FitResult sdd;
  std::vector<CoefficientGap> gaps;
};

// Fits first and double differences on the same path and reports, per
// coefficient, the gap, the combined standard error sqrt(se1^2 + se2^2),
// and whether the double-difference estimate lies inside the
// first-difference 95% interval.
SddCheckResult sdd_check(const SpatialDataset& ds, const OrderedPath& path, const SEMethod& se,
                         const std::vector<std::string>& columns = {});

}  // namespace sfd
