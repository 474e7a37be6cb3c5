#include "dynreg/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace dynreg {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(num(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json to_json(const IntegralEvidence& ev) {
  Json j;
  j["name"] = ev.name;
  j["verdict"] = to_string(ev.verdict);
  j["rate"] = to_string(ev.rate);
  j["limit"] = to_json(ev.limit);
  j["residual"] = num(ev.residual);
  j["diagnostic"] = ev.diagnostic;
  Json partial = Json::array();
  for (std::size_t i = 0; i < ev.partial_values.size(); ++i) {
    Json row;
    row["k"] = i < ev.k.size() ? ev.k[i] : -1;
    row["value"] = to_json(ev.partial_values[i]);
    partial.push_back(row);
  }
  j["partial"] = partial;
  Json ext = Json::array();
  for (std::size_t i = 0; i < ev.ext_values.size(); ++i) {
    Json row;
    row["t"] = num(i < ev.ext_t.size() ? ev.ext_t[i] : NAN);
    row["value"] = to_json(ev.ext_values[i]);
    ext.push_back(row);
  }
  j["extended"] = ext;
  return j;
}

Json to_json(const AsymptoticLimit& a) {
  Json j;
  j["verdict"] = to_string(a.verdict);
  j["phi_inf"] = to_json(a.phi_inf);
  j["residual"] = num(a.residual);
  j["prev_residual"] = num(a.prev_residual);
  j["window_start"] = num(a.window_start);
  j["diagnostic"] = a.diagnostic;
  return j;
}

Json to_json(const StabilityReport& s) {
  Json j;
  j["verdict"] = to_string(s.verdict_uniform_stability);
  j["K_hat"] = num(s.K_hat);
  Json trend = Json::array();
  for (std::size_t i = 0; i < s.K_trend.size(); ++i) {
    Json row;
    row["window_end"] = num(i < s.window_ends.size() ? s.window_ends[i] : NAN);
    row["K"] = num(s.K_trend[i]);
    trend.push_back(row);
  }
  j["K_trend"] = trend;
  j["growth_exponent"] = num(s.growth_exponent);
  j["asymptotic"] = s.asymptotic ? to_json(*s.asymptotic) : Json(nullptr);
  j["diagnostic"] = s.diagnostic;
  return j;
}

Json to_json(const DynamicsEvidence& d) {
  Json j;
  j["t0"] = num(d.t0);
  j["t1"] = num(d.t1);
  j["K_hat_at_2t0"] = num(d.K_hat_at_2t0);
  j["stability"] = to_json(d.stability);
  return j;
}

Json to_json(const ModulusDiagnostics& d) {
  Json j;
  j["nondecreasing"] = d.nondecreasing;
  j["vanishes_at_origin"] = d.vanishes_at_origin;
  j["kappa_monotone"] = d.kappa_monotone;
  j["worst_kappa_violation"] = num(d.worst_kappa_violation);
  j["note"] = d.note;
  return j;
}

Json to_json(const RegularityVerdict& v) {
  Json j;
  j["classification"] = to_string(v.classification);
  j["route"] = to_string(v.route);
  j["analytic_classification"] = to_string(v.analytic_classification);
  j["dynamics_classification"] = to_string(v.dynamics_classification);
  Json ev = Json::object();
  for (const auto& [k, e] : v.evidence) ev[k] = to_json(e);
  j["evidence"] = ev;
  j["dynamics"] = v.dynamics ? to_json(*v.dynamics) : Json(nullptr);
  j["modulus_diagnostics"] = to_json(v.modulus_diagnostics);
  j["notes"] = v.notes;
  return j;
}

Json to_json(const MomentData& m) {
  Json j;
  j["r"] = num(m.r);
  j["t"] = num(m.t);
  j["alpha"] = num(m.alpha);
  j["beta"] = to_json(Eigen::VectorXd(m.beta));
  j["gamma"] = to_json(Eigen::VectorXd(m.gamma));
  j["A"] = to_json(m.Amat);
  j["B"] = to_json(m.Bmat);
  j["C"] = to_json(m.Cmat);
  j["R"] = to_json(m.R);
  j["S"] = to_json(m.S);
  j["mu"] = num(m.mu);
  return j;
}

Json to_json(const IndependenceReport& r) {
  Json j;
  j["horizon"] = num(r.horizon);
  j["asym_constant"] = to_json(r.asym_constant);
  j["uniformly_stable"] = to_json(r.uniformly_stable);
  j["square_dini"] = to_json(r.square_dini);
  j["running_integral_at_horizon"] = num(r.running_integral_at_horizon);
  j["max_window_sup"] = num(r.max_window_sup);
  j["gronwall_ratio"] = num(r.gronwall_ratio);
  return j;
}

Json to_json(const CesariGenerator& c) {
  Json j;
  j["description"] = c.gen.description;
  j["kind"] = c.params.kind == CesariKind::MinusInfinity ? "minus-infinity" : "convergent";
  j["decay_exponent"] = num(c.params.decay_exponent);
  j["horizon"] = num(c.params.horizon);
  j["envelope_C"] = num(c.params.C);
  j["fill"] = num(c.params.fill);
  Json blocks = Json::array();
  for (const auto& b : c.blocks) {
    Json row;
    row["T"] = num(b.T);
    row["height_pos"] = num(b.height_pos);
    row["height_neg"] = num(b.height_neg);
    row["b"] = num(b.b);
    row["c"] = num(b.c);
    row["running_after"] = num(b.running_after);
    blocks.push_back(row);
  }
  j["blocks"] = blocks;
  j["running_integral_at_horizon"] = num(c.running_integral_at_horizon);
  j["max_window_sup"] = num(c.max_window_sup);
  return j;
}

Json to_json(const ModeSolution& m) {
  Json j;
  j["t_start"] = num(m.t_start);
  j["full_system_deviation"] = num(m.full_system_deviation);
  j["scalar_log_deviation"] = num(m.scalar_log_deviation);
  j["scalar_bound"] = num(m.scalar_bound);
  j["truncation_radius"] = m.truncation_radius ? num(*m.truncation_radius) : Json(nullptr);
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.r.size(); ++i) {
    Json row;
    row["r"] = num(m.r[i]);
    row["v"] = num(m.v[i]);
    row["rv_prime"] = num(m.rv_prime[i]);
    row["phi"] = num(m.phi[i]);
    row["psi"] = num(m.psi[i]);
    rows.push_back(row);
  }
  j["table"] = rows;
  return j;
}

Json to_json(const SpectralDecomposition& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    Json row;
    row["r"] = num(s.radii[i]);
    row["u0"] = num(s.u0[i]);
    row["v"] = {num(s.v[i](0)), num(s.v[i](1))};
    row["w_mean"] = num(s.w_means[i]);
    row["w_moment"] = num(s.w_moments[i]);
    row["w_max"] = num(s.w_max[i]);
    rows.push_back(row);
  }
  Json j;
  j["circle_resolution"] = s.circle_resolution;
  j["table"] = rows;
  return j;
}

Json to_json(const LipschitzQuotient& q) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < q.radii.size(); ++i) {
    Json row;
    row["r"] = num(q.radii[i]);
    row["Q"] = num(q.Q[i]);
    row["l2_mean"] = num(q.l2_mean[i]);
    row["Q_normalized"] = num(q.Q_normalized[i]);
    rows.push_back(row);
  }
  Json j;
  j["verdict"] = to_string(q.verdict);
  j["u_origin"] = num(q.u_origin);
  j["increasing_run"] = q.increasing_run;
  j["table"] = rows;
  return j;
}

Json to_json(const GradientEstimate& g) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    Json row;
    row["r"] = num(g.radii[i]);
    row["v"] = {num(g.v[i](0)), num(g.v[i](1))};
    if (i > 0) row["extrapolated"] = {num(g.extrapolated[i - 1](0)), num(g.extrapolated[i - 1](1))};
    else row["extrapolated"] = nullptr;
    rows.push_back(row);
  }
  Json j;
  j["verdict"] = to_string(g.verdict);
  j["limit"] = {num(g.limit(0)), num(g.limit(1))};
  j["residual"] = num(g.residual);
  j["decreasing_run"] = g.decreasing_run;
  j["table"] = rows;
  return j;
}

Json Report::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = subcommand;
  j["status"] = status;
  Json prov;
  prov["tool"] = "dynreg";
  prov["tool_version"] = kToolVersion;
  prov["config_hash"] = config_hash;
  prov["field"] = field_description;
  j["provenance"] = prov;
  j["result"] = result;
  j["error"] = error.is_null() ? Json(nullptr) : error;
  Json info;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  info["timestamp"] = buf;
  info["wall_times_s"] = wall_times;
  j["run_info"] = info;
  return j;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace dynreg
