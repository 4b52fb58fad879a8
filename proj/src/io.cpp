#include "sfd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfd/errors.hpp"
#include "sfd/linalg.hpp"

namespace sfd {

namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", decimals, v);
  return buf;
}

Json coefficient_entries(const FitResult& r) {
  Json coefs = Json::array();
  for (Index i = 0; i < r.coefficients.size(); ++i) {
    const double est = r.coefficients(i);
    const double se = r.se(i);
    const double p = two_sided_p(est, se);
    Json c;
    c["name"] = r.coef_names[static_cast<std::size_t>(i)];
    c["estimate"] = est;
    c["se"] = se;
    if (se > 0.0) {
      c["z"] = est / se;
    } else {
      c["z"] = nullptr;
    }
    c["p"] = p;
    c["stars"] = significance_stars(p);
    coefs.push_back(std::move(c));
  }
  return coefs;
}

void require_shared_coefficients(const std::vector<std::pair<std::string, FitResult>>& fits) {
  if (fits.empty()) throw DomainError("standard-error table needs at least one fit");
  const auto& base = fits.front().second;
  for (const auto& [label, r] : fits) {
    if (r.coef_names != base.coef_names) {
      throw DomainError("standard-error table fits disagree on coefficients ('" + label + "')");
    }
    if ((r.coefficients - base.coefficients).cwiseAbs().maxCoeff() > 1e-12) {
      throw DomainError("standard-error table fits disagree on estimates ('" + label +
                        "'); all methods must come from one fit");
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw ComputationError("floating-point formatting failed");
  return std::string(buf, res.ptr);
}

double two_sided_p(double estimate, double se) {
  if (se <= 0.0) return estimate == 0.0 ? 1.0 : 0.0;
  return normal_two_sided_p(estimate / se);
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char ch : field) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code cleanup;
    fs::remove(tmp, cleanup);
    throw IoError("cannot replace '" + path + "': " + ec.message());
  }
}

void write_json_atomic(const std::string& path, const Json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("invalid JSON in '" + path + "': " + ex.what());
  }
}

Json to_json(const FitResult& r) {
  Json j;
  j["schema"] = "sfd.fit/1";
  j["estimator"] = to_string(r.kind);
  j["se_method"] = r.se_label;
  j["direction"] = r.direction;
  j["n_obs"] = r.n_obs;
  j["n_channels"] = r.n_channels;
  j["r_squared"] = r.r_squared;
  j["coefficients"] = coefficient_entries(r);
  Json vcov = Json::array();
  for (Index i = 0; i < r.vcov.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < r.vcov.cols(); ++k) row.push_back(r.vcov(i, k));
    vcov.push_back(std::move(row));
  }
  j["vcov"] = std::move(vcov);
  j["warnings"] = r.warnings;
  return j;
}

std::string fit_csv(const FitResult& r) {
  std::string out = "name,estimate,se,z,p,stars,estimator,se_method,n_obs,n_channels,r_squared\n";
  for (Index i = 0; i < r.coefficients.size(); ++i) {
    const double est = r.coefficients(i);
    const double se = r.se(i);
    const double p = two_sided_p(est, se);
    out += csv_escape(r.coef_names[static_cast<std::size_t>(i)]) + ",";
    out += format_double(est) + "," + format_double(se) + ",";
    out += se > 0.0 ? format_double(est / se) : std::string();
    out += "," + format_double(p) + "," + significance_stars(p) + ",";
    out += to_string(r.kind) + "," + csv_escape(r.se_label) + ",";
    out += std::to_string(r.n_obs) + "," + std::to_string(r.n_channels) + ",";
    out += format_double(r.r_squared) + "\n";
  }
  return out;
}

std::string coefficient_table(const FitResult& r) {
  std::size_t width = 11;
  for (const auto& n : r.coef_names) width = std::max(width, n.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %14s  %14s  %s\n", static_cast<int>(width),
                "coefficient", "estimate", "std.error", "signif");
  out << line;
  for (Index i = 0; i < r.coefficients.size(); ++i) {
    const double est = r.coefficients(i);
    const double se = r.se(i);
    const std::string stars = significance_stars(two_sided_p(est, se));
    std::snprintf(line, sizeof(line), "%-*s  %14s  %14s  %s\n", static_cast<int>(width),
                  r.coef_names[static_cast<std::size_t>(i)].c_str(), fixed(est).c_str(),
                  fixed(se).c_str(), stars.c_str());
    out << line;
  }
  out << "n = " << r.n_obs << ", R^2 = " << fixed(r.r_squared, 4)
      << ", estimator = " << to_string(r.kind) << ", se = " << r.se_label
      << ", channels = " << r.n_channels << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return out.str();
}

Json to_json(const DGPConfig& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["n"] = c.n;
  j["beta"] = c.beta;
  j["alpha"] = c.alpha;
  j["sigma_eps"] = c.sigma_eps;
  j["lambda"] = c.lambda;
  j["phi"] = c.phi;
  j["scenario"] = std::string(1, c.scenario);
  j["gamma"] = c.gamma;
  j["lag"] = c.lag;
  j["seed"] = c.seed;
  return j;
}

DGPConfig dgp_config_from_json(const Json& j) {
  try {
    DGPConfig c;
    c.kind = dgp_kind_from_string(j.at("kind").get<std::string>());
    c.n = j.at("n").get<Index>();
    c.beta = j.at("beta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.sigma_eps = j.at("sigma_eps").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.phi = j.at("phi").get<double>();
    const auto scenario = j.at("scenario").get<std::string>();
    if (scenario.size() != 1) throw DomainError("scenario must be one character");
    c.scenario = scenario[0];
    c.gamma = j.at("gamma").get<double>();
    c.lag = j.at("lag").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("DGP config JSON: ") + ex.what());
  }
}

Json to_json(const MonteCarloReport& report) {
  Json j;
  j["schema"] = "sfd.monte_carlo/1";
  j["config"] = to_json(report.config);
  j["reps"] = report.reps;
  Json estimators = Json::array();
  for (const auto& er : report.estimators) {
    Json e;
    e["label"] = er.label;
    e["kind"] = to_string(er.kind);
    e["completed"] = er.draws.rows();
    e["failures"] = er.failures;
    e["failure_reasons"] = er.failure_reasons;
    Json summaries = Json::array();
    for (const auto& s : er.summaries) {
      Json sj;
      sj["name"] = s.name;
      sj["mean"] = s.mean;
      sj["variance"] = s.variance;
      sj["sd"] = s.sd;
      sj["q025"] = s.q025;
      sj["q975"] = s.q975;
      if (s.has_truth) sj["bias"] = s.bias;
      if (s.has_relative_efficiency) sj["relative_efficiency"] = s.relative_efficiency;
      summaries.push_back(std::move(sj));
    }
    e["summaries"] = std::move(summaries);
    estimators.push_back(std::move(e));
  }
  j["estimators"] = std::move(estimators);
  return j;
}

std::string monte_carlo_csv(const MonteCarloReport& report) {
  std::string out = "rep,estimator,coefficient,value\n";
  for (const auto& er : report.estimators) {
    for (Index r = 0; r < er.draws.rows(); ++r) {
      for (Index k = 0; k < er.draws.cols(); ++k) {
        out += std::to_string(er.rep_ids[static_cast<std::size_t>(r)]) + ",";
        out += csv_escape(er.label) + ",";
        out += csv_escape(er.coef_names[static_cast<std::size_t>(k)]) + ",";
        out += format_double(er.draws(r, k)) + "\n";
      }
    }
  }
  return out;
}

std::string monte_carlo_table(const MonteCarloReport& report) {
  std::ostringstream out;
  char line[320];
  std::snprintf(line, sizeof(line), "%-14s %-14s %12s %12s %12s %12s %12s %10s\n", "estimator",
                "coefficient", "mean", "sd", "q2.5%", "q97.5%", "bias", "rel.eff");
  out << line;
  for (const auto& er : report.estimators) {
    for (const auto& s : er.summaries) {
      std::snprintf(line, sizeof(line), "%-14s %-14s %12s %12s %12s %12s %12s %10s\n",
                    er.label.c_str(), s.name.c_str(), fixed(s.mean).c_str(), fixed(s.sd).c_str(),
                    fixed(s.q025).c_str(), fixed(s.q975).c_str(),
                    s.has_truth ? fixed(s.bias).c_str() : "-",
                    s.has_relative_efficiency ? fixed(s.relative_efficiency, 4).c_str() : "-");
      out << line;
    }
    if (er.failures > 0) {
      out << er.label << ": " << er.failures << " failed reps\n";
    }
  }
  return out.str();
}

Json to_json(const SweepResult& s) {
  Json j;
  j["schema"] = "sfd.sweep/1";
  j["axis"] = s.axis_name;
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    Json ej;
    ej["axis_value"] = e.axis_value;
    ej["spec_id"] = e.spec_id;
    ej["estimator"] = to_string(e.kind);
    ej["ok"] = e.ok;
    if (!e.ok) {
      ej["reason"] = e.reason;
    } else {
      ej["n_obs"] = e.n_obs;
      ej["n_channels"] = e.n_channels;
      Json coefs = Json::array();
      for (Index i = 0; i < e.coefficients.size(); ++i) {
        Json c;
        c["name"] = e.coef_names[static_cast<std::size_t>(i)];
        c["estimate"] = e.coefficients(i);
        c["se"] = e.ses(i);
        coefs.push_back(std::move(c));
      }
      ej["coefficients"] = std::move(coefs);
    }
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  Json dispersion = Json::array();
  for (const auto& d : s.dispersion) {
    Json dj;
    dj["estimator"] = d.kind_label;
    dj["coefficient"] = d.coef;
    dj["count"] = d.count;
    dj["mean"] = d.mean;
    dj["variance"] = d.variance;
    dj["sd"] = d.sd;
    dj["cov"] = d.cov;
    dj["cov_guarded"] = d.cov_guarded;
    dispersion.push_back(std::move(dj));
  }
  j["dispersion"] = std::move(dispersion);
  Json focal = Json::array();
  for (const auto& f : s.focal) {
    Json fj;
    fj["estimator"] = f.kind_label;
    fj["coefficient"] = f.coef;
    fj["count"] = f.count;
    fj["min"] = f.min;
    fj["q1"] = f.q1;
    fj["median"] = f.median;
    fj["q3"] = f.q3;
    fj["max"] = f.max;
    fj["variance"] = f.variance;
    focal.push_back(std::move(fj));
  }
  j["focal"] = std::move(focal);
  return j;
}

std::string sweep_csv(const SweepResult& s) {
  std::string out = "axis_value,spec_id,estimator,coefficient,estimate,se\n";
  for (const auto& e : s.entries) {
    if (!e.ok) continue;
    for (Index i = 0; i < e.coefficients.size(); ++i) {
      out += format_double(e.axis_value) + "," + csv_escape(e.spec_id) + ",";
      out += to_string(e.kind) + ",";
      out += csv_escape(e.coef_names[static_cast<std::size_t>(i)]) + ",";
      out += format_double(e.coefficients(i)) + "," + format_double(e.ses(i)) + "\n";
    }
  }
  return out;
}

Json to_json(const SddCheckResult& r) {
  Json j;
  j["schema"] = "sfd.sdd_check/1";
  j["sfd"] = to_json(r.sfd);
  j["sdd"] = to_json(r.sdd);
  Json gaps = Json::array();
  for (const auto& g : r.gaps) {
    Json gj;
    gj["name"] = g.name;
    gj["sfd_estimate"] = g.sfd_estimate;
    gj["sfd_se"] = g.sfd_se;
    gj["sdd_estimate"] = g.sdd_estimate;
    gj["sdd_se"] = g.sdd_se;
    gj["gap"] = g.gap;
    gj["combined_se"] = g.combined_se;
    gj["inside_sfd_ci"] = g.inside_sfd_ci;
    gaps.push_back(std::move(gj));
  }
  j["gaps"] = std::move(gaps);
  return j;
}

std::string sdd_table(const SddCheckResult& r) {
  std::size_t width = 11;
  for (const auto& g : r.gaps) width = std::max(width, g.name.size());
  std::ostringstream out;
  char line[320];
  std::snprintf(line, sizeof(line), "%-*s %12s %12s %12s %12s %12s %12s  %s\n",
                static_cast<int>(width), "coefficient", "sfd", "sfd.se", "sdd", "sdd.se", "gap",
                "comb.se", "in 95% CI");
  out << line;
  for (const auto& g : r.gaps) {
    std::snprintf(line, sizeof(line), "%-*s %12s %12s %12s %12s %12s %12s  %s\n",
                  static_cast<int>(width), g.name.c_str(), fixed(g.sfd_estimate).c_str(),
                  fixed(g.sfd_se).c_str(), fixed(g.sdd_estimate).c_str(), fixed(g.sdd_se).c_str(),
                  fixed(g.gap).c_str(), fixed(g.combined_se).c_str(),
                  g.inside_sfd_ci ? "yes" : "no");
    out << line;
  }
  return out.str();
}

namespace {

// coordinate headers are pos_x/pos_y so regressors named x or y never
// collide with them
std::string dataset_csv_impl(const SpatialDataset& ds, const SimulatedDataset* sim) {
  std::string out = "id,pos_x,pos_y," + csv_escape(ds.outcome_name);
  for (const auto& c : ds.columns) out += "," + csv_escape(c);
  if (sim != nullptr) out += ",confounder,noise";
  out += "\n";
  for (Index i = 0; i < ds.n_units(); ++i) {
    out += csv_escape(ds.ids[static_cast<std::size_t>(i)]);
    out += "," + format_double(ds.positions(i, 0)) + "," + format_double(ds.positions(i, 1));
    out += "," + format_double(ds.outcome(i));
    for (Index j = 0; j < ds.X.cols(); ++j) out += "," + format_double(ds.X(i, j));
    if (sim != nullptr) {
      out += "," + format_double(sim->confounder(i)) + "," + format_double(sim->noise(i));
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string dataset_csv(const SpatialDataset& ds) { return dataset_csv_impl(ds, nullptr); }

std::string simulated_csv(const SimulatedDataset& sim) {
  return dataset_csv_impl(sim.data, &sim);
}

std::string path_csv(const OrderedPath& path) {
  std::string out = "channel,position,id\n";
  for (std::size_t c = 0; c < path.channels.size(); ++c) {
    for (std::size_t i = 0; i < path.channels[c].size(); ++i) {
      out += std::to_string(c) + "," + std::to_string(i) + ",";
      out += csv_escape(path.channels[c][i]) + "\n";
    }
  }
  return out;
}

std::string design_csv(const DifferencedDesign& d) {
  const std::string prefix = d.order == 0 ? "" : d.order == 1 ? "d_" : "dd_";
  std::string out = "row,channel,unit,neighbor,neighbor2,pos_x,pos_y," +
                    csv_escape(prefix + d.outcome_name);
  for (const auto& c : d.columns) out += "," + csv_escape(prefix + c);
  out += "\n";
  for (Index r = 0; r < d.n_rows(); ++r) {
    const auto& pair = d.pair_ids[static_cast<std::size_t>(r)];
    out += std::to_string(r) + "," +
           std::to_string(d.channel_of_row[static_cast<std::size_t>(r)]) + ",";
    out += csv_escape(pair[0]) + "," + csv_escape(pair[1]) + "," + csv_escape(pair[2]);
    out += "," + format_double(d.row_positions(r, 0)) + "," +
           format_double(d.row_positions(r, 1));
    out += "," + format_double(d.dy(r));
    for (Index j = 0; j < d.dX.cols(); ++j) out += "," + format_double(d.dX(r, j));
    out += "\n";
  }
  return out;
}

std::string se_table_text(const std::vector<std::pair<std::string, FitResult>>& fits) {
  require_shared_coefficients(fits);
  const auto& base = fits.front().second;
  std::size_t width = 11;
  for (const auto& n : base.coef_names) width = std::max(width, n.size());
  std::ostringstream out;
  out << std::string(width, ' ');
  std::vector<std::size_t> colw;
  for (const auto& [label, r] : fits) {
    colw.push_back(std::max<std::size_t>(14, label.size() + 2));
    out << "  " << std::string(colw.back() - label.size(), ' ') << label;
  }
  out << "\n";
  for (Index i = 0; i < base.coefficients.size(); ++i) {
    out << base.coef_names[static_cast<std::size_t>(i)]
        << std::string(width - base.coef_names[static_cast<std::size_t>(i)].size(), ' ');
    for (std::size_t f = 0; f < fits.size(); ++f) {
      const auto& r = fits[f].second;
      const std::string cell =
          fixed(r.coefficients(i)) + significance_stars(two_sided_p(r.coefficients(i), r.se(i)));
      out << "  " << std::string(colw[f] > cell.size() ? colw[f] - cell.size() : 0, ' ') << cell;
    }
    out << "\n" << std::string(width, ' ');
    for (std::size_t f = 0; f < fits.size(); ++f) {
      const std::string cell = "[" + fixed(fits[f].second.se(i)) + "]";
      out << "  " << std::string(colw[f] > cell.size() ? colw[f] - cell.size() : 0, ' ') << cell;
    }
    out << "\n";
  }
  out << "n = " << base.n_obs << ", estimator = " << to_string(base.kind) << "\n";
  return out.str();
}

std::string se_table_csv(const std::vector<std::pair<std::string, FitResult>>& fits) {
  require_shared_coefficients(fits);
  const auto& base = fits.front().second;
  std::string out = "coefficient,estimate";
  for (const auto& [label, r] : fits) out += ",se_" + csv_escape(label);
  out += "\n";
  for (Index i = 0; i < base.coefficients.size(); ++i) {
    out += csv_escape(base.coef_names[static_cast<std::size_t>(i)]) + ",";
    out += format_double(base.coefficients(i));
    for (const auto& [label, r] : fits) out += "," + format_double(r.se(i));
    out += "\n";
  }
  return out;
}

Json se_table_json(const std::vector<std::pair<std::string, FitResult>>& fits) {
  require_shared_coefficients(fits);
  const auto& base = fits.front().second;
  Json j;
  j["schema"] = "sfd.se_table/1";
  j["estimator"] = to_string(base.kind);
  j["n_obs"] = base.n_obs;
  j["n_channels"] = base.n_channels;
  j["coefficients"] = base.coef_names;
  Json est = Json::array();
  for (Index i = 0; i < base.coefficients.size(); ++i) est.push_back(base.coefficients(i));
  j["estimates"] = std::move(est);
  Json methods = Json::array();
  for (const auto& [label, r] : fits) {
    Json m;
    m["label"] = label;
    m["se_method"] = r.se_label;
    Json ses = Json::array();
    for (Index i = 0; i < r.coefficients.size(); ++i) ses.push_back(r.se(i));
    m["ses"] = std::move(ses);
    m["warnings"] = r.warnings;
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  return j;
}

}  // namespace sfd
