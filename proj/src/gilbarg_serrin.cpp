#include "dynreg/gilbarg_serrin.hpp"

#include "dynreg/appendix.hpp"
#include "dynreg/sphmean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dynreg {

ScalarGenerator scalar_generator(const RadialProfile& g) {
  ScalarGenerator gen;
  gen.gtil = [g](double t) { return g.at_t(t); };
  gen.breakpoints = g.breakpoints(0.0, std::numeric_limits<double>::infinity());
  gen.analytic_integral = [g](double a, double b) { return g.integral_t(a, b); };
  gen.profile = g;
  gen.description = g.describe();
  return gen;
}

ScalarGenerator scalar_reduction(const CoefficientField& field) {
  if (field.family() != Family::GilbargSerrin || !field.gs_profile()) {
    throw DomainError("scalar_reduction: field is not of Gilbarg-Serrin type");
  }
  const RadialProfile& g = *field.gs_profile();
  const int n = field.dim();
  const SphericalGrid grid = default_sphere_grid(n);
  for (double t : {0.1, 0.7, 2.0, 5.0, 13.0, 40.0, 150.0, 1000.0}) {
    const Mat R = mean_matrix_R_t(field, t, grid);
    const Mat expect = ((1.0 - n) / n) * g.at_t(t) * Mat::Identity(n, n);
    const double err = max_abs_entry(R - expect);
    if (err > 1e-10) {
      std::ostringstream os;
      os << "scalar_reduction: spherical-mean R differs from ((1-n)/n) g I by " << err << " at t = " << t;
      throw NumericalError(os.str());
    }
  }
  return scalar_generator(g);
}

LinearGenerator as_linear_generator(const ScalarGenerator& gen, int n) {
  LinearGenerator lin;
  lin.dim = 1;
  const double k = (n - 1.0) / n;
  auto g = gen.gtil;
  lin.R = [g, k](double t) {
    MatrixXd m(1, 1);
    m(0, 0) = -k * g(t);
    return m;
  };
  lin.breakpoints = gen.breakpoints;
  lin.description = "scalar reduction of " + gen.description;
  return lin;
}

double closed_form_phi(const ScalarGenerator& gen, int n, double t, double phi0, double t_start) {
  if (!gen.analytic_integral) throw DomainError("closed_form_phi: generator has no analytic integral");
  return phi0 * std::exp((n - 1.0) / n * gen.analytic_integral(t_start, t));
}

namespace {

// max over s < t of int_s^t g for a piecewise-constant profile (extremes at breaks).
double piecewise_window_sup(const RadialProfile& p, double t_end) {
  std::vector<double> pts{0.0};
  for (double b : p.breakpoints(0.0, t_end)) pts.push_back(b);
  pts.push_back(t_end);
  double min_G = 0.0, best = 0.0;
  for (double t : pts) {
    const double G = p.integral_t(0.0, t);
    min_G = std::min(min_G, G);
    best = std::max(best, G - min_G);
  }
  return best;
}

}  // namespace

CesariGenerator build_cesari_counterexample(const CesariParams& params) {
  const double a = params.decay_exponent;
  if (!(a > 0.5 && a < 1.0)) {
    throw DomainError("build_cesari_counterexample: decay exponent must lie in (1/2, 1) (square integrable, not integrable)");
  }
  if (!(params.horizon >= 100.0)) throw DomainError("build_cesari_counterexample: horizon >= 100 required");
  if (!(params.fill > 0.0 && params.fill < 1.0)) throw DomainError("build_cesari_counterexample: fill in (0, 1)");
  auto E = [&](double t) { return params.C * std::pow(1.0 + t, -a); };

  // Geometric block starts T = H 2^-m, largest first, kept while plateau heights stay admissible.
  std::vector<double> starts;
  for (int m = 1; m < 60; ++m) {
    const double T = params.horizon * std::ldexp(1.0, -m);
    if (params.fill * E(1.75 * T) > params.max_height) break;
    starts.push_back(T);
  }
  std::reverse(starts.begin(), starts.end());

  CesariGenerator out;
  out.params = params;
  std::vector<double> breaks;
  std::vector<double> values{0.0};
  double running = 0.0;
  int j = 0;
  for (double T : starts) {
    CesariBlock blk;
    blk.T = T;
    const double env = E(1.75 * T);
    blk.height_pos = params.fill * env;
    blk.b = 0.25 * T * blk.height_pos;
    blk.c = params.kind == CesariKind::MinusInfinity ? blk.b : 0.5 * std::ldexp(1.0, -j);
    blk.height_neg = (blk.b + blk.c) / (0.5 * T);
    if (blk.height_neg > std::min(env, params.max_height)) continue;  // cancellation does not fit under the envelope
    running -= blk.c;
    blk.running_after = running;
    breaks.insert(breaks.end(), {T, 1.25 * T, 1.75 * T});
    values.insert(values.end(), {blk.height_pos, -blk.height_neg, 0.0});
    out.blocks.push_back(blk);
    ++j;
  }
  double b_max = 0.0;
  for (const auto& blk : out.blocks) b_max = std::max(b_max, blk.b);
  if (out.blocks.empty() || b_max < params.min_block_sup) {
    std::ostringstream os;
    os << "build_cesari_counterexample: infeasible; the envelope " << params.C << " (1+t)^-" << a << " with fill "
       << params.fill << " allows a largest block sum of " << b_max << " within horizon " << params.horizon
       << ", below the required " << params.min_block_sup;
    throw DomainError(os.str());
  }
  const RadialProfile profile = RadialProfile::piecewise(breaks, values);
  out.gen = scalar_generator(profile);
  out.gen.envelope_C = params.C;
  out.gen.envelope_exponent = a;
  std::ostringstream os;
  os << (params.kind == CesariKind::MinusInfinity ? "cesari-minus-infinity" : "cesari-convergent") << " (a=" << a
     << ", H=" << params.horizon << ")";
  out.gen.description = os.str();
  out.running_integral_at_horizon = profile.integral_t(0.0, params.horizon);
  out.max_window_sup = piecewise_window_sup(profile, params.horizon);
  return out;
}

IndependenceReport verify_independence(const ScalarGenerator& gen, int n, double tol, double horizon, double asym_tol,
                                       double window_fraction) {
  IndependenceReport rep;
  rep.horizon = horizon;
  const LinearGenerator lin = as_linear_generator(gen, n);
  const auto grid = stability_grid(0.0, horizon);
  rep.uniformly_stable = stability_constant(fundamental_matrix(lin, grid, tol));

  IntegrateOptions opts;
  opts.tol = tol;
  const Trajectory traj = integrate_system(lin, 0.0, horizon, VectorXd::Ones(1), opts);
  rep.asym_constant = asymptotic_limit(traj, window_fraction, asym_tol);
  rep.uniformly_stable.asymptotic = rep.asym_constant;
  rep.gronwall_ratio = gronwall_bound_check(traj, lin).worst_ratio;

  Budget b;
  b.tol = 1e-8;
  auto g = gen.gtil;
  rep.square_dini = integral_evidence(
      "square_dini",
      [g](double t) {
        Mat m(1, 1);
        m(0, 0) = g(t) * g(t);
        return m;
      },
      0.0, b, gen.breakpoints);

  // G(t) = n/(n-1) log phi(t)
  const double k = n / (n - 1.0);
  double min_G = 0.0;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const double G = k * std::log(std::abs(traj.y[i](0)));
    min_G = std::min(min_G, G);
    rep.max_window_sup = std::max(rep.max_window_sup, G - min_G);
  }
  rep.running_integral_at_horizon =
      gen.analytic_integral ? gen.analytic_integral(0.0, horizon) : k * std::log(std::abs(traj.y.back()(0)));
  return rep;
}

ModeSolution gs_mode_ode_solution(const RadialProfile& g, int n, const std::vector<double>& r_grid, double tol,
                                  double t_start, bool cross_check) {
  if (n < 2) throw DomainError("gs_mode_ode_solution: n >= 2 required");
  ModeSolution out;
  out.t_start = t_start;
  const double T = t_start;
  std::vector<double> taus;
  for (double r : r_grid) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("gs_mode_ode_solution: radii must lie in (0, 1]");
    const double t = -std::log(r);
    if (t > T) throw DomainError("gs_mode_ode_solution: radius below the deep start e^-t_start");
    taus.push_back(T - t);
  }
  taus.push_back(T);  // r = 1 for normalization
  std::vector<double> bps;
  for (double b : g.breakpoints(0.0, T)) bps.push_back(T - b);

  // dV/dt = P V with P = [[1, -1/a], [-(c - a), n - 1]]; tau = T - t.
  auto P = [&g, n](double t) {
    const double gv = g.at_t(t);
    const double a = (1.0 + gv) / n;
    const double c = 1.0 + gv / n;
    Eigen::Matrix2d p;
    p << 1.0, -1.0 / a, -(c - a), n - 1.0;
    return p;
  };
  auto rhs = [&](double tau, const VectorXd& y) -> VectorXd { return -(P(T - tau) * y); };
  VectorXd V0(2);
  V0 << n, 1.0;  // J (1, 0)
  IntegrateOptions opts;
  opts.tol = tol;
  opts.output_times = taus;
  Trajectory traj;
  double tau_end = T;
  try {
    traj = integrate_rhs(rhs, bps, 0.0, T, V0, opts);
  } catch (const NumericalError&) {
    // Shrink the window until the stepper survives; report where it stopped.
    double lo = 0.0, hi = T;
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      try {
        traj = integrate_rhs(rhs, bps, 0.0, mid, V0, opts);
        lo = mid;
      } catch (const NumericalError&) {
        hi = mid;
      }
    }
    tau_end = lo;
    if (lo <= 0.0) throw;
    out.truncation_radius = std::exp(-(T - tau_end));
  }
  const double nn = n;
  const double v_norm = tau_end >= T ? traj.at(T)(0) : 1.0;
  for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
    if (taus[i] > tau_end) continue;
    const VectorXd V = traj.at(taus[i]);
    const double t = T - taus[i];
    const double a = (1.0 + g.at_t(t)) / nn;
    const double v = V(0);
    const double v_t = v - V(1) / a;  // V2 = -a v_t + a v
    out.r.push_back(r_grid[i]);
    out.v.push_back(v / v_norm);
    out.rv_prime.push_back(-v_t / v_norm);
    out.phi.push_back(((nn - 1.0) / (nn * nn)) * V(0) + V(1) / nn);
    out.psi.push_back(V(0) / (nn * nn) - V(1) / nn);
  }

  // Scalar reduction: phi_s(t) = exp(-((n-1)/n) int_t^T gtil), phi_s(T) = 1.
  std::vector<double> edges{0.0};
  for (double b : g.breakpoints(0.0, T)) edges.push_back(b);
  edges.push_back(T);
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    const double t = -std::log(out.r[i]);
    const double phi_s = std::exp(-((nn - 1.0) / nn) * g.integral_t(t, T));
    out.scalar_log_deviation = std::max(out.scalar_log_deviation, std::abs(std::log(std::abs(out.phi[i]) / phi_s)));
  }
  {
    const auto s = PiecewiseSamples::adaptive(
        [&g](double t) {
          Mat m(1, 1);
          m(0, 0) = g.at_t(t) * g.at_t(t);
          return m;
        },
        edges, 1e-12);
    out.scalar_bound = s.cumulative_at_edges().back()(0, 0);
  }

  if (cross_check && tau_end >= T) {
    const CoefficientField field = make_gilbarg_serrin(n, g);
    const SphericalGrid grid = default_sphere_grid(n);
    const LinearGenerator full = reduced_generator(field, grid);
    LinearGenerator flipped;
    flipped.dim = full.dim;
    flipped.R = [&full, T](double tau) -> MatrixXd { return -full.R(T - tau); };
    flipped.breakpoints = bps;
    VectorXd W0 = VectorXd::Zero(2 * n);
    W0(0) = n;
    W0(n) = 1.0;
    IntegrateOptions o2 = opts;
    const Trajectory full_traj = integrate_system(flipped, 0.0, T, W0, o2);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const VectorXd Vp = traj.at(taus[i]);
      const VectorXd Vf = full_traj.at(taus[i]);
      const double scale = std::max(1.0, Vp.cwiseAbs().maxCoeff());
      double dev = std::max(std::abs(Vf(0) - Vp(0)), std::abs(Vf(n) - Vp(1)));
      for (int k = 1; k < n; ++k) dev = std::max({dev, std::abs(Vf(k)), std::abs(Vf(n + k))});
      out.full_system_deviation = std::max(out.full_system_deviation, dev / scale);
    }
  }
  return out;
}

}  // namespace dynreg
