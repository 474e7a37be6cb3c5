#include "dynreg/appendix.hpp"
#include "dynreg/config.hpp"
#include "dynreg/criteria.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/gilbarg_serrin.hpp"
#include "dynreg/pde.hpp"
#include "dynreg/report.hpp"
#include "dynreg/sphmean.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace dynreg;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct Context {
  RunConfig cfg;
  std::string out_dir;
  Report report;
};

void run_moments(Context& ctx) {
  const CoefficientField field = build_field(ctx.cfg.field);
  ctx.report.field_description = field.description();
  const SphericalGrid grid = ctx.cfg.budget.grid(field.dim());
  Json rows = Json::array();
  CsvTable csv;
  const int n = field.dim();
  csv.header = {"r", "t", "alpha", "mu", "max_abs_R", "consistency"};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) csv.header.push_back("R" + std::to_string(i + 1) + std::to_string(k + 1));
  for (double r : ctx.cfg.moments.radii) {
    const MomentData m = appendix_moments(field, r, grid);
    Json row = to_json(m);
    const double cons = moment_consistency(field, r, grid);
    row["consistency"] = num(cons);
    rows.push_back(row);
    std::vector<double> line{m.r, m.t, m.alpha, m.mu, max_abs_entry(m.R), cons};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) line.push_back(m.R(i, k));
    csv.rows.push_back(line);
  }
  ctx.report.result["moments"] = rows;
  write_csv(ctx.out_dir + "/moments.csv", csv);
}

void run_integrate(Context& ctx) {
  const CoefficientField field = build_field(ctx.cfg.field);
  ctx.report.field_description = field.description();
  const auto& I = ctx.cfg.integrate;
  const int n = field.dim();
  const LinearGenerator gen = spherical_mean_generator(field, ctx.cfg.budget.grid(n), I.t0, I.t1);
  IntegrateOptions opts;
  opts.tol = I.tol;
  Trajectory traj;
  CsvTable csv;
  csv.header = {"t", "r"};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) csv.header.push_back("Phi" + std::to_string(i + 1) + std::to_string(k + 1));
  std::vector<Eigen::MatrixXd> Phi;
  for (int c = 0; c < n; ++c) {
    traj = integrate_system(gen, I.t0, I.t1, Eigen::VectorXd::Unit(n, c), opts);
    if (c == 0) Phi.assign(I.samples, Eigen::MatrixXd::Zero(n, n));
    for (int s = 0; s < I.samples; ++s) {
      const double t = I.t0 + (I.t1 - I.t0) * s / (I.samples - 1);
      Phi[s].col(c) = traj.at(t);
    }
  }
  for (int s = 0; s < I.samples; ++s) {
    const double t = I.t0 + (I.t1 - I.t0) * s / (I.samples - 1);
    std::vector<double> line{t, std::exp(-t)};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) line.push_back(Phi[s](i, k));
    csv.rows.push_back(line);
  }
  write_csv(ctx.out_dir + "/trajectory.csv", csv);
  const auto gr = gronwall_bound_check(traj, gen);
  Json j;
  j["t0"] = num(I.t0);
  j["t1"] = num(I.t1);
  j["tol"] = num(I.tol);
  j["Phi_end"] = to_json(Mat(Phi.back()));
  j["rejected_steps_last_column"] = traj.rejected_steps;
  j["accepted_samples_last_column"] = traj.t.size();
  j["gronwall_worst_ratio"] = num(gr.worst_ratio);
  ctx.report.result["integrate"] = j;
}

Json classify_json(const RegularityVerdict& v, const std::string& out_dir) {
  for (const auto& [name, ev] : v.evidence) {
    CsvTable csv;
    csv.header = {"k", "value_max_entry"};
    for (std::size_t i = 0; i < ev.partial_values.size(); ++i)
      csv.rows.push_back({static_cast<double>(i < ev.k.size() ? ev.k[i] : -1),
                          ev.partial_values[i].size() ? ev.partial_values[i].cwiseAbs().maxCoeff() : 0.0});
    write_csv(out_dir + "/evidence_" + name + ".csv", csv);
  }
  if (v.dynamics) {
    CsvTable csv;
    csv.header = {"window_end", "K"};
    const auto& st = v.dynamics->stability;
    for (std::size_t i = 0; i < st.K_trend.size(); ++i) csv.rows.push_back({st.window_ends[i], st.K_trend[i]});
    write_csv(out_dir + "/k_trend.csv", csv);
  }
  return to_json(v);
}

void run_classify(Context& ctx, bool with_dynamics) {
  const CoefficientField field = build_field(ctx.cfg.field);
  ctx.report.field_description = field.description();
  const RegularityVerdict v = classify(field, ctx.cfg.budget, with_dynamics);
  ctx.report.result["verdict"] = classify_json(v, ctx.out_dir);
  std::cout << "classification: " << to_string(v.classification) << " (route " << to_string(v.route) << ")\n";
}

void run_appendix(Context& ctx) {
  const CoefficientField field = build_field(ctx.cfg.field);
  ctx.report.field_description = field.description();
  const int n = field.dim();
  const SphericalGrid grid = ctx.cfg.budget.grid(n);
  const Eigen::MatrixXd M = m_infinity<double>(n);
  const Eigen::MatrixXd J = jordanizer<double>(n);
  const Eigen::MatrixXd D = jordanizer_inverse<double>(n) * M * J;
  Eigen::MatrixXd Dexp = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Dexp.bottomRightCorner(n, n) = -n * Eigen::MatrixXd::Identity(n, n);
  Json j;
  j["M_inf_diagonalization_error"] = num((D - Dexp).cwiseAbs().maxCoeff());
  Json rows = Json::array();
  CsvTable csv;
  csv.header = {"r", "t", "r1_residual", "consistency", "max_abs_S1"};
  for (double r : ctx.cfg.moments.radii) {
    const MomentData m = appendix_moments(field, r, grid);
    const R1Residual res = r1_block_residual(m);
    const Eigen::MatrixXd S1 = s1_matrix(m);
    Json row;
    row["r"] = num(r);
    row["t"] = num(m.t);
    row["r1_residual"] = num(res.residual);
    row["consistency"] = num(res.consistency);
    row["R1"] = to_json(Mat(res.R1));
    row["max_abs_S1"] = num(S1.cwiseAbs().maxCoeff());
    rows.push_back(row);
    csv.rows.push_back({r, m.t, res.residual, res.consistency, S1.cwiseAbs().maxCoeff()});
  }
  j["radii"] = rows;
  ctx.report.result["appendix"] = j;
  write_csv(ctx.out_dir + "/appendix.csv", csv);
}

void run_gs(Context& ctx, const std::string& example) {
  const auto& G = ctx.cfg.gs;
  const int n = ctx.cfg.field.n;
  if (example == "mode") {
    if (ctx.cfg.field.g.empty()) throw ConfigError("config field 'field.g': required for gs example 'mode'");
    const RadialProfile g = RadialProfile::parse(ctx.cfg.field.g);
    ctx.report.field_description = "gilbarg-serrin g = " + g.describe();
    const ModeSolution m = gs_mode_ode_solution(g, n, G.r_grid, G.tol, G.t_start);
    ctx.report.result["mode"] = to_json(m);
    CsvTable csv;
    csv.header = {"r", "v", "rv_prime", "phi", "psi"};
    for (std::size_t i = 0; i < m.r.size(); ++i) csv.rows.push_back({m.r[i], m.v[i], m.rv_prime[i], m.phi[i], m.psi[i]});
    write_csv(ctx.out_dir + "/gs_mode.csv", csv);
    return;
  }
  CesariParams p = ctx.cfg.field.cesari;
  p.kind = example == "cesari-minus-infinity" ? CesariKind::MinusInfinity : CesariKind::ConvergentImproper;
  p.horizon = G.horizon;
  const CesariGenerator c = build_cesari_counterexample(p);
  ctx.report.field_description = c.gen.description;
  const IndependenceReport rep = verify_independence(c.gen, n, ctx.cfg.budget.dyn_tol, p.horizon,
                                                     ctx.cfg.budget.asym_tol, ctx.cfg.budget.window_fraction);
  ctx.report.result["generator"] = to_json(c);
  ctx.report.result["independence"] = to_json(rep);
  CsvTable csv;
  csv.header = {"T", "height_pos", "height_neg", "b", "c", "running_after"};
  for (const auto& b : c.blocks) csv.rows.push_back({b.T, b.height_pos, b.height_neg, b.b, b.c, b.running_after});
  write_csv(ctx.out_dir + "/cesari_blocks.csv", csv);
  std::cout << "asym_constant: " << to_string(rep.asym_constant.verdict)
            << ", uniformly_stable: " << to_string(rep.uniformly_stable.verdict_uniform_stability)
            << ", square_dini: " << to_string(rep.square_dini.verdict) << '\n';
}

void run_verify(Context& ctx, bool with_classify) {
  const auto& V = ctx.cfg.verify;
  const CoefficientField field = build_field(ctx.cfg.field);
  ctx.report.field_description = field.description();
  if (field.dim() != 2) throw ConfigError("config field 'field.n': verify requires n = 2");
  const NamedBoundary bc = boundary_by_name(V.boundary);
  Stopwatch sw;
  const GridSolution sol = solve_dirichlet(field, bc.f, V.N, V.tol);
  ctx.report.wall_times["solve"] = sw.seconds();
  Json j;
  j["N"] = V.N;
  j["boundary"] = V.boundary;
  j["iterations"] = sol.iterations;
  j["residual_norm"] = num(sol.residual_norm);
  const SpectralDecomposition dec = spectral_decompose(sol, V.radii, V.circle_resolution);
  const LipschitzQuotient q = lipschitz_quotient(sol, V.radii, V.circle_resolution);
  const GradientEstimate g = gradient_at_origin(sol, V.radii, V.circle_resolution);
  j["decomposition"] = to_json(dec);
  j["lipschitz_quotient"] = to_json(q);
  j["gradient"] = to_json(g);
  CsvTable csv;
  csv.header = {"r", "u0", "v1", "v2", "Q", "w_mean", "w_moment"};
  for (std::size_t i = 0; i < dec.radii.size(); ++i) {
    const double r = dec.radii[i];
    double Q = NAN;
    for (std::size_t k = 0; k < q.radii.size(); ++k)
      if (q.radii[k] == r) Q = q.Q[k];
    csv.rows.push_back({r, dec.u0[i], dec.v[i](0), dec.v[i](1), Q, dec.w_means[i], dec.w_moments[i]});
  }
  write_csv(ctx.out_dir + "/verify.csv", csv);
  ctx.report.result["pde"] = j;
  if (with_classify) {
    sw = Stopwatch{};
    const RegularityVerdict v = classify(field, ctx.cfg.budget);
    ctx.report.wall_times["classify"] = sw.seconds();
    ctx.report.result["verdict"] = classify_json(v, ctx.out_dir);
    // evidence-level consistency, reported either way
    Json cons;
    cons["classification"] = to_string(v.classification);
    cons["quotient"] = to_string(q.verdict);
    cons["gradient"] = to_string(g.verdict);
    const bool lip = v.classification != Classification::Inconclusive;
    const bool diff = v.classification == Classification::DifferentiableAtOrigin ||
                      v.classification == Classification::DifferentiableWithZeroGradient;
    std::vector<std::string> disc;
    if (lip && q.verdict == QuotientVerdict::Unbounded) disc.push_back("regular verdict but Lipschitz quotient grows");
    if (diff && g.verdict != GradientVerdict::EvidenceConverged)
      disc.push_back("differentiable verdict but gradient extrapolation not converged");
    if (v.classification == Classification::DifferentiableWithZeroGradient) {
      // logarithmic decay of |v(r)| is not resolved at grid scale, so only monotone decay is checked
      const int needed = static_cast<int>(g.v.size()) - 1;
      if (g.decreasing_run < needed) disc.push_back("zero-gradient verdict but |v(r)| does not decrease monotonically");
      cons["gradient_limit_norm"] = num(g.limit.norm());
      cons["note"] = "zero gradient expected; extrapolated limit reflects the smallest resolved radius only";
    }
    cons["discrepancies"] = disc;
    ctx.report.result["consistency"] = cons;
  }
  std::cout << "quotient: " << to_string(q.verdict) << ", gradient: " << to_string(g.verdict) << " limit ("
            << g.limit(0) << ", " << g.limit(1) << ")\n";
}

void run_report(Context& ctx) {
  Stopwatch sw;
  run_moments(ctx);
  ctx.report.wall_times["moments"] = sw.seconds();
  sw = Stopwatch{};
  run_classify(ctx, true);
  ctx.report.wall_times["classify"] = sw.seconds();
  if (ctx.cfg.field.n == 2 && ctx.cfg.verify.classify) {
    sw = Stopwatch{};
    run_verify(ctx, false);
    ctx.report.wall_times["verify"] = sw.seconds();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynreg: regularity at a point for divergence-form elliptic equations"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_flag;
  std::string example;
  std::optional<int> N_flag;
  std::string boundary_flag;
  std::vector<double> radii_flag;
  bool no_dynamics = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration");
    sub->add_option("-o,--out", out_flag, "output directory (overrides DYNREG_OUTPUT_DIR and the config)");
  };
  CLI::App* moments = app.add_subcommand("moments", "spherical-mean moments and R(r) over the configured radii");
  CLI::App* integrate = app.add_subcommand("integrate", "fundamental matrix of the log-time system");
  CLI::App* classify_cmd = app.add_subcommand("classify", "criteria tables and the regularity verdict");
  CLI::App* appendix = app.add_subcommand("appendix", "first-order system blocks and the R1 residual");
  CLI::App* gs = app.add_subcommand("gs", "Gilbarg-Serrin modes and counterexample generators");
  CLI::App* verify = app.add_subcommand("verify", "2-D finite-volume cross-check");
  CLI::App* report = app.add_subcommand("report", "moments, classification and (n = 2) PDE evidence");
  for (auto* s : {moments, integrate, classify_cmd, appendix, gs, verify, report}) add_common(s);
  classify_cmd->add_flag("--no-dynamics", no_dynamics, "skip the dynamical-system evidence");
  gs->add_option("--example", example, "mode | cesari-convergent | cesari-minus-infinity");
  verify->add_option("--N", N_flag, "cells per side");
  verify->add_option("--boundary", boundary_flag, "boundary data name");
  verify->add_option("--radii", radii_flag, "dyadic radii");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();

  Context ctx;
  ctx.report.subcommand = sub->get_name();
  try {
    std::string text = "{}";
    if (!config_path.empty()) ctx.cfg = load_config(config_path);
    else ctx.cfg = parse_config(text);
    if (N_flag) ctx.cfg.verify.N = *N_flag;
    if (!boundary_flag.empty()) ctx.cfg.verify.boundary = boundary_flag;
    if (!radii_flag.empty()) ctx.cfg.verify.radii = radii_flag;
    if (ctx.cfg.verify.N < 64 || ctx.cfg.verify.N > 1024 || ctx.cfg.verify.N % 2)
      throw ConfigError("config field 'verify.N': must be even and in [64, 1024]");
    if (!example.empty()) {
      if (example != "mode" && example != "cesari-convergent" && example != "cesari-minus-infinity")
        throw ConfigError("config field 'gs.example': unknown example '" + example + "'");
      ctx.cfg.gs.example = example;
    }
    boundary_by_name(ctx.cfg.verify.boundary);
  } catch (const Error& e) {
    std::cerr << "dynreg: " << e.what() << '\n';
    return 2;
  }
  ctx.report.config_hash = config_hash(ctx.cfg);
  ctx.out_dir = ctx.cfg.output_dir;
  if (const char* env = std::getenv("DYNREG_OUTPUT_DIR"); env && *env) ctx.out_dir = env;
  if (!out_flag.empty()) ctx.out_dir = out_flag;
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) {
    std::cerr << "dynreg: cannot create output directory '" << ctx.out_dir << "': " << ec.message() << '\n';
    return 2;
  }

  const std::string report_path = ctx.out_dir + "/" + ctx.report.subcommand + "_report.json";
  int code = 0;
  Stopwatch total;
  try {
    const std::string& s = ctx.report.subcommand;
    if (s == "moments") run_moments(ctx);
    else if (s == "integrate") run_integrate(ctx);
    else if (s == "classify") run_classify(ctx, !no_dynamics);
    else if (s == "appendix") run_appendix(ctx);
    else if (s == "gs") run_gs(ctx, ctx.cfg.gs.example);
    else if (s == "verify") run_verify(ctx, ctx.cfg.verify.classify);
    else if (s == "report") run_report(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "dynreg: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    ctx.report.status = "numerical_failure";
    ctx.report.error = Json{{"subcommand", ctx.report.subcommand}, {"message", e.what()}};
    std::cerr << "dynreg: " << e.what() << '\n';
    code = 1;
  }
  ctx.report.wall_times["total"] = total.seconds();
  try {
    write_json(report_path, ctx.report.to_json());
  } catch (const Error& e) {
    std::cerr << "dynreg: " << e.what() << '\n';
    return 1;
  }
  std::cout << "report: " << report_path << '\n';
  return code;
}
