#include "sfd/estimation.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/inference.hpp"

namespace sfd {

namespace {

std::vector<std::string> with_intercept_names(const std::vector<std::string>& columns) {
  std::vector<std::string> names;
  names.reserve(columns.size() + 1);
  names.emplace_back("(intercept)");
  names.insert(names.end(), columns.begin(), columns.end());
  return names;
}

// Resolves a column-subset request against design columns, keeping design
// order. Empty request means everything.
std::vector<Index> column_subset(const std::vector<std::string>& available,
                                 const std::vector<std::string>& requested) {
  std::vector<Index> idx;
  if (requested.empty()) {
    idx.resize(available.size());
    for (std::size_t i = 0; i < available.size(); ++i) idx[i] = static_cast<Index>(i);
    return idx;
  }
  for (const auto& name : requested) {
    auto it = std::find(available.begin(), available.end(), name);
    if (it == available.end()) {
      throw DomainError("unknown regressor column '" + name + "'");
    }
    idx.push_back(static_cast<Index>(it - available.begin()));
  }
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw DomainError("regressor column requested twice");
  }
  return idx;
}

Matrix select_columns(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = x.col(idx[j]);
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
  return value;
}

long long parse_integer(const std::string& text, const std::string& what) {
  long long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::levels: return "levels";
    case EstimatorKind::sfd: return "sfd";
    case EstimatorKind::sdd: return "sdd";
    case EstimatorKind::robinson: return "robinson";
  }
  throw DomainError("unreachable estimator kind");
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  if (name == "levels") return EstimatorKind::levels;
  if (name == "sfd") return EstimatorKind::sfd;
  if (name == "sdd") return EstimatorKind::sdd;
  if (name == "robinson") return EstimatorKind::robinson;
  throw DomainError("unknown estimator kind '" + name +
                    "'; expected levels, sfd, sdd, or robinson");
}

void SEMethod::validate() const {
  switch (kind) {
    case Kind::newey_west:
      if (lag < 1) throw DomainError("newey_west lag must be >= 1");
      break;
    case Kind::conley:
      if (cutoff_x <= 0.0 || cutoff_y <= 0.0) {
        throw DomainError("conley cutoffs must be positive");
      }
      break;
    case Kind::bootstrap:
    case Kind::block_bootstrap:
      if (replications < 100) throw DomainError("bootstrap needs at least 100 replications");
      break;
    default:
      break;
  }
}

std::string SEMethod::label() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::ols: return "ols";
    case Kind::hc: return "hc";
    case Kind::newey_west:
      out << "newey_west(lag=" << lag << ")";
      break;
    case Kind::conley:
      out << "conley(cutoff_x=" << cutoff_x << ",cutoff_y=" << cutoff_y << ")";
      break;
    case Kind::cluster: return "cluster";
    case Kind::bootstrap:
      out << "bootstrap(B=" << replications << ",seed=" << seed << ")";
      break;
    case Kind::block_bootstrap:
      out << "block_bootstrap(B=" << replications << ",seed=" << seed << ")";
      break;
  }
  return out.str();
}

SEMethod SEMethod::parse(const std::string& text) {
  std::string head = text;
  std::string args;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    head = text.substr(0, colon);
    args = text.substr(colon + 1);
  }
  std::replace(head.begin(), head.end(), '_', '-');

  SEMethod m;
  if (head == "ols" || head == "hc" || head == "cluster") {
    if (!args.empty()) throw DomainError("'" + head + "' takes no parameters");
    m.kind = head == "ols" ? Kind::ols : head == "hc" ? Kind::hc : Kind::cluster;
    return m;
  }
  if (head == "newey-west") {
    m.kind = Kind::newey_west;
    if (!args.empty()) m.lag = static_cast<int>(parse_integer(args, "newey-west lag"));
  } else if (head == "conley") {
    m.kind = Kind::conley;
    const auto parts = split_on(args, ',');
    if (parts.size() != 2) {
      throw DomainError("conley needs two cutoffs, e.g. conley:1.5,1.5");
    }
    m.cutoff_x = parse_real(parts[0], "conley cutoff_x");
    m.cutoff_y = parse_real(parts[1], "conley cutoff_y");
  } else if (head == "bootstrap" || head == "block-bootstrap") {
    m.kind = head == "bootstrap" ? Kind::bootstrap : Kind::block_bootstrap;
    if (!args.empty()) {
      const auto parts = split_on(args, ':');
      if (parts.size() > 2) throw DomainError("'" + head + "' takes at most B and seed");
      m.replications = static_cast<int>(parse_integer(parts[0], "bootstrap replications"));
      if (parts.size() == 2) {
        m.seed = static_cast<std::uint64_t>(parse_integer(parts[1], "bootstrap seed"));
      }
    }
  } else {
    throw DomainError("unknown standard-error method '" + text + "'");
  }
  m.validate();
  return m;
}

Index FitResult::coef_index(const std::string& name) const {
  const auto it = std::find(coef_names.begin(), coef_names.end(), name);
  if (it == coef_names.end()) throw DomainError("no coefficient named '" + name + "'");
  return static_cast<Index>(it - coef_names.begin());
}

FitResult ols_fit(const Matrix& x, const Vector& y, const std::vector<std::string>& names,
                  bool intercept) {
  if (static_cast<Index>(names.size()) != x.cols()) {
    throw DomainError("one name per regressor column is required");
  }
  const Matrix a = intercept ? with_intercept(x) : x;
  const auto full_names = intercept ? with_intercept_names(names) : names;
  const auto sol = solve_least_squares(a, y, full_names, intercept);

  FitResult r;
  r.coef_names = full_names;
  r.coefficients = sol.coef;
  r.vcov = ols_vcov(a, sol.residuals);
  r.residuals = sol.residuals;
  r.n_obs = y.size();
  r.r_squared = sol.r_squared;
  r.kind = EstimatorKind::levels;
  r.se_label = "ols";
  r.n_channels = 1;
  return r;
}

FitResult fit_design(const DifferencedDesign& d, const SEMethod& se,
                     const std::vector<std::string>& columns) {
  se.validate();
  const auto idx = column_subset(d.columns, columns);
  std::vector<std::string> kept;
  kept.reserve(idx.size());
  for (Index j : idx) kept.push_back(d.columns[static_cast<std::size_t>(j)]);

  const Matrix a = with_intercept(select_columns(d.dX, idx));
  const auto names = with_intercept_names(kept);
  const auto sol = solve_least_squares(a, d.dy, names, true);

  FitResult r;
  r.coef_names = names;
  r.coefficients = sol.coef;
  r.residuals = sol.residuals;
  r.n_obs = d.n_rows();
  r.r_squared = sol.r_squared;
  r.kind = d.order == 0   ? EstimatorKind::levels
           : d.order == 1 ? EstimatorKind::sfd
                          : EstimatorKind::sdd;
  r.se_label = se.label();
  r.direction = d.direction;
  r.n_channels = d.n_channels;

  switch (se.kind) {
    case SEMethod::Kind::ols:
      r.vcov = ols_vcov(a, sol.residuals);
      break;
    case SEMethod::Kind::hc:
      r.vcov = hc_vcov(a, sol.residuals);
      break;
    case SEMethod::Kind::newey_west:
      r.vcov = newey_west_vcov(a, sol.residuals, d.channel_of_row, se.lag, &r.warnings);
      break;
    case SEMethod::Kind::conley:
      r.vcov = conley_vcov(a, sol.residuals, d.row_positions, se.cutoff_x, se.cutoff_y,
                           &r.warnings);
      break;
    case SEMethod::Kind::cluster:
      r.vcov = cluster_vcov(a, sol.residuals, d.channel_of_row, d.n_channels);
      break;
    case SEMethod::Kind::bootstrap:
      r.vcov = bootstrap_vcov(a, d.dy, se.replications, se.seed, false, d.channel_of_row,
                              &r.warnings);
      break;
    case SEMethod::Kind::block_bootstrap:
      r.vcov = bootstrap_vcov(a, d.dy, se.replications, se.seed, true, d.channel_of_row,
                              &r.warnings);
      break;
  }
  return r;
}

FitResult fit(const SpatialDataset& ds, const OrderedPath& path, EstimatorKind kind,
              const SEMethod& se) {
  switch (kind) {
    case EstimatorKind::levels:
      return fit_design(levels_design(ds, path), se);
    case EstimatorKind::sfd:
      return fit_design(spatial_first_difference(ds, path), se);
    case EstimatorKind::sdd:
      return fit_design(spatial_double_difference(ds, path), se);
    case EstimatorKind::robinson:
      throw DomainError("robinson needs a bandwidth; call robinson_fit");
  }
  throw DomainError("unreachable estimator kind");
}

Vector local_window_means(const Vector& values, const std::vector<Index>& channel_lengths,
                          int h) {
  if (h < 1) throw DomainError("window half-width must be >= 1");
  Index total = 0;
  for (Index len : channel_lengths) {
    if (len <= 0) throw DomainError("channel lengths must be positive");
    total += len;
  }
  if (total != values.size()) {
    throw DomainError("channel lengths do not add up to the value count");
  }
  Vector out(values.size());
  Index offset = 0;
  for (Index len : channel_lengths) {
    for (Index i = 0; i < len; ++i) {
      const Index lo = std::max<Index>(0, i - h);
      const Index hi = std::min<Index>(len - 1, i + h);
      out(offset + i) = values.segment(offset + lo, hi - lo + 1).mean();
    }
    offset += len;
  }
  return out;
}

FitResult robinson_fit(const SpatialDataset& ds, const OrderedPath& path, int h,
                       const std::vector<std::string>& columns) {
  if (h < 1) throw DomainError("robinson bandwidth must be >= 1");
  const DifferencedDesign d = levels_design(ds, path);
  const auto idx = column_subset(d.columns, columns);
  std::vector<std::string> kept;
  kept.reserve(idx.size());
  for (Index j : idx) kept.push_back(d.columns[static_cast<std::size_t>(j)]);
  const Matrix x = select_columns(d.dX, idx);

  std::vector<Index> lengths;
  for (std::size_t i = 0; i < d.channel_of_row.size();) {
    std::size_t j = i;
    while (j < d.channel_of_row.size() && d.channel_of_row[j] == d.channel_of_row[i]) ++j;
    lengths.push_back(static_cast<Index>(j - i));
    i = j;
  }

  Vector y_tilde = d.dy - local_window_means(d.dy, lengths, h);
  Matrix x_tilde(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    x_tilde.col(j) = x.col(j) - local_window_means(x.col(j), lengths, h);
  }

  const auto sol = solve_least_squares(x_tilde, y_tilde, kept, false);

  FitResult r;
  r.coef_names = with_intercept_names(kept);
  r.coefficients = Vector(sol.coef.size() + 1);
  r.coefficients(0) = y_tilde.mean();
  r.coefficients.tail(sol.coef.size()) = sol.coef;
  r.residuals = sol.residuals;
  r.n_obs = d.n_rows();
  r.r_squared = sol.r_squared;
  r.kind = EstimatorKind::robinson;
  r.se_label = "ols";
  r.direction = d.direction;
  r.n_channels = d.n_channels;

  // Slope covariance from the residual-on-residual solve; the reported
  // intercept is a sample mean, so its variance is sigma^2 / n and it is
  // kept uncorrelated with the slopes.
  const Matrix slope_vcov = ols_vcov(x_tilde, sol.residuals);
  const double sigma2 =
      sol.residuals.squaredNorm() / static_cast<double>(x_tilde.rows() - x_tilde.cols());
  r.vcov = Matrix::Zero(sol.coef.size() + 1, sol.coef.size() + 1);
  r.vcov(0, 0) = sigma2 / static_cast<double>(d.n_rows());
  r.vcov.bottomRightCorner(sol.coef.size(), sol.coef.size()) = slope_vcov;
  return r;
}

}  // namespace sfd
