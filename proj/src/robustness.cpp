#include "sfd/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sfd/differencing.hpp"
#include "sfd/errors.hpp"
#include "sfd/ordering.hpp"

namespace sfd {

namespace {

constexpr double kCovMeanGuard = 1e-8;

SweepEntry entry_from_fit(const FitResult& r) {
  SweepEntry e;
  e.ok = true;
  e.kind = r.kind;
  e.coef_names = r.coef_names;
  e.coefficients = r.coefficients;
  e.ses = Vector(r.coefficients.size());
  for (Index i = 0; i < r.coefficients.size(); ++i) e.ses(i) = r.se(i);
  e.n_obs = r.n_obs;
  e.n_channels = r.n_channels;
  return e;
}

// One DispersionStats per (kind, coefficient) pair present among ok entries.
std::vector<DispersionStats> collect_dispersion(const std::vector<SweepEntry>& entries) {
  std::vector<DispersionStats> out;
  for (const auto& e : entries) {
    if (!e.ok) continue;
    for (std::size_t j = 0; j < e.coef_names.size(); ++j) {
      const std::string kind_label = to_string(e.kind);
      auto it = std::find_if(out.begin(), out.end(), [&](const DispersionStats& d) {
        return d.kind_label == kind_label && d.coef == e.coef_names[j];
      });
      if (it == out.end()) {
        out.push_back({kind_label, e.coef_names[j], 0, 0.0, 0.0, 0.0, 0.0, false});
        it = out.end() - 1;
      }
      // first pass accumulates the mean
      it->mean += e.coefficients(static_cast<Index>(j));
      ++it->count;
    }
  }
  for (auto& d : out) d.mean /= static_cast<double>(d.count);
  for (const auto& e : entries) {
    if (!e.ok) continue;
    for (std::size_t j = 0; j < e.coef_names.size(); ++j) {
      const std::string kind_label = to_string(e.kind);
      for (auto& d : out) {
        if (d.kind_label != kind_label || d.coef != e.coef_names[j]) continue;
        const double dev = e.coefficients(static_cast<Index>(j)) - d.mean;
        d.variance += dev * dev;
      }
    }
  }
  for (auto& d : out) {
    d.variance = d.count > 1 ? d.variance / static_cast<double>(d.count - 1) : 0.0;
    d.sd = std::sqrt(d.variance);
    if (std::abs(d.mean) < kCovMeanGuard) {
      d.cov = 0.0;
      d.cov_guarded = true;
    } else {
      d.cov = d.sd / std::abs(d.mean);
    }
  }
  return out;
}

std::string format_theta(double theta) {
  std::ostringstream out;
  out << "theta=" << theta;
  return out.str();
}

}  // namespace

const SweepEntry& SweepResult::entry_at(double axis_value) const {
  for (const auto& e : entries) {
    if (e.axis_value == axis_value) return e;
  }
  throw DomainError("no sweep entry at the requested axis value");
}

const DispersionStats& SweepResult::dispersion_for(const std::string& kind_label,
                                                   const std::string& coef) const {
  for (const auto& d : dispersion) {
    if (d.kind_label == kind_label && d.coef == coef) return d;
  }
  throw DomainError("no dispersion entry for " + kind_label + "/" + coef);
}

const FocalSummary& SweepResult::focal_for(const std::string& kind_label) const {
  for (const auto& f : focal) {
    if (f.kind_label == kind_label) return f;
  }
  throw DomainError("no focal summary for estimator kind " + kind_label);
}

std::vector<double> full_rotation_grid() {
  std::vector<double> grid;
  for (int t = -89; t <= 90; ++t) grid.push_back(static_cast<double>(t));
  return grid;
}

std::vector<double> coarse_rotation_grid() { return {-60.0, -30.0, 0.0, 30.0, 60.0, 90.0}; }

SweepResult rotation_sweep(const SpatialDataset& ds, double width,
                           const std::vector<double>& thetas, const SEMethod& se,
                           const std::vector<std::string>& columns) {
  if (thetas.empty()) throw DomainError("rotation sweep needs at least one angle");
  for (double t : thetas) {
    if (t < -89.0 || t > 90.0) {
      throw DomainError("rotation angles must lie in [-89, 90]; bands repeat every 180 degrees");
    }
  }
  SweepResult result;
  result.axis_name = "theta_degrees";
  for (double theta : thetas) {
    SweepEntry entry;
    try {
      const OrderedPath path = assign_channels(ds, width, theta);
      const FitResult r = fit_design(spatial_first_difference(ds, path), se, columns);
      entry = entry_from_fit(r);
    } catch (const Error& ex) {
      entry.ok = false;
      entry.reason = ex.what();
      entry.kind = EstimatorKind::sfd;
    }
    entry.axis_value = theta;
    entry.spec_id = format_theta(theta);
    result.entries.push_back(std::move(entry));
  }
  result.dispersion = collect_dispersion(result.entries);
  return result;
}

SweepResult extreme_bounds(const SpatialDataset& ds, const OrderedPath& path,
                           const CovariateGroup& focal,
                           const std::vector<CovariateGroup>& controls,
                           const std::vector<EstimatorKind>& kinds, const SEMethod& se) {
  if (focal.members.empty()) throw DomainError("focal group has no members");
  if (controls.size() > 16) {
    throw DomainError("at most 16 control groups (2^16 specifications) are supported");
  }
  if (kinds.empty()) throw DomainError("extreme_bounds needs at least one estimator kind");
  for (EstimatorKind k : kinds) {
    if (k != EstimatorKind::levels && k != EstimatorKind::sfd) {
      throw DomainError("extreme_bounds covers levels and sfd only");
    }
  }
  {
    std::set<std::string> seen;
    auto check_group = [&](const CovariateGroup& g) {
      if (g.members.empty()) throw DomainError("control group '" + g.name + "' has no members");
      for (const auto& m : g.members) {
        if (!seen.insert(m).second) {
          throw DomainError("column '" + m + "' appears in more than one covariate group");
        }
        if (std::find(ds.columns.begin(), ds.columns.end(), m) == ds.columns.end()) {
          throw DomainError("covariate group names unknown column '" + m + "'");
        }
      }
    };
    check_group(focal);
    for (const auto& g : controls) check_group(g);
  }
  std::set<EstimatorKind> kind_set(kinds.begin(), kinds.end());
  if (kind_set.size() != kinds.size()) throw DomainError("estimator kinds must be unique");

  SweepResult result;
  result.axis_name = "control_subset";
  const std::size_t n_specs = std::size_t{1} << controls.size();
  for (EstimatorKind kind : kinds) {
    DifferencedDesign design = kind == EstimatorKind::levels
                                   ? levels_design(ds, path)
                                   : spatial_first_difference(ds, path);
    for (std::size_t mask = 0; mask < n_specs; ++mask) {
      std::vector<std::string> cols = focal.members;
      std::string included;
      for (std::size_t g = 0; g < controls.size(); ++g) {
        if ((mask >> g) & 1u) {
          cols.insert(cols.end(), controls[g].members.begin(), controls[g].members.end());
          if (!included.empty()) included += ",";
          included += controls[g].name;
        }
      }
      SweepEntry entry;
      try {
        entry = entry_from_fit(fit_design(design, se, cols));
      } catch (const Error& ex) {
        entry.ok = false;
        entry.reason = ex.what();
        entry.kind = kind;
      }
      entry.axis_value = static_cast<double>(mask);
      entry.spec_id =
          to_string(kind) + ":controls={" + (included.empty() ? "none" : included) + "}";
      result.entries.push_back(std::move(entry));
    }
  }
  result.dispersion = collect_dispersion(result.entries);

  const std::string& focal_coef = focal.members.front();
  for (EstimatorKind kind : kinds) {
    std::vector<double> values;
    for (const auto& e : result.entries) {
      if (!e.ok || e.kind != kind) continue;
      const auto it = std::find(e.coef_names.begin(), e.coef_names.end(), focal_coef);
      if (it == e.coef_names.end()) continue;
      values.push_back(e.coefficients(static_cast<Index>(it - e.coef_names.begin())));
    }
    FocalSummary f;
    f.kind_label = to_string(kind);
    f.coef = focal_coef;
    f.count = static_cast<Index>(values.size());
    if (!values.empty()) {
      f.min = *std::min_element(values.begin(), values.end());
      f.max = *std::max_element(values.begin(), values.end());
      f.q1 = quantile(values, 0.25);
      f.median = quantile(values, 0.5);
      f.q3 = quantile(values, 0.75);
      f.variance = values.size() > 1 ? variance_of(values) : 0.0;
    }
    result.focal.push_back(std::move(f));
  }
  return result;
}

SddCheckResult sdd_check(const SpatialDataset& ds, const OrderedPath& path, const SEMethod& se,
                         const std::vector<std::string>& columns) {
  SddCheckResult out;
  out.sfd = fit_design(spatial_first_difference(ds, path), se, columns);
  out.sdd = fit_design(spatial_double_difference(ds, path), se, columns);
  for (std::size_t j = 0; j < out.sfd.coef_names.size(); ++j) {
    const Index i = static_cast<Index>(j);
    CoefficientGap g;
    g.name = out.sfd.coef_names[j];
    g.sfd_estimate = out.sfd.coefficients(i);
    g.sfd_se = out.sfd.se(i);
    g.sdd_estimate = out.sdd.coefficients(i);
    g.sdd_se = out.sdd.se(i);
    g.gap = g.sdd_estimate - g.sfd_estimate;
    g.combined_se = std::sqrt(g.sfd_se * g.sfd_se + g.sdd_se * g.sdd_se);
    g.inside_sfd_ci = std::abs(g.gap) <= 1.959963984540054 * g.sfd_se;
    out.gaps.push_back(std::move(g));
  }
  return out;
}

}  // namespace sfd
