// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "dynreg/appendix.hpp"
#include "dynreg/criteria.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/gilbarg_serrin.hpp"
#include "dynreg/pde.hpp"
#include "dynreg/sphmean.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dynreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> dyadic_radii(int count) {
  std::vector<double> r;
  for (int k = 1; k <= count; ++k) r.push_back(std::ldexp(1.0, -k));
  return r;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Mat random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> N01;
  Mat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = N01(rng);
  return B * B.transpose() + 0.5 * Mat::Identity(n, n);
}

Mat random_symmetric(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  Mat S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) S(i, j) = S(j, i) = U(rng);
  return S;
}

Outcome c1_annihilation() {
  std::mt19937 rng(20240601);
  std::vector<CoefficientField> fields;
  for (int k = 0; k < 10; ++k) {
    const int n = 2 + k % 2;
    fields.push_back(make_constant(n, random_spd(n, rng)));
  }
  const char* profiles[] = {"r", "0.5*r^0.5", "0.4/log(e/r)"};
  for (int k = 0; k < 3; ++k) {
    const int n = 2 + k % 2;
    fields.push_back(make_radial(n, RadialMatrix{RadialProfile::parse(profiles[k]), random_symmetric(n, rng)}));
  }
  double worst = 0.0;
  for (const auto& f : fields) {
    const auto grid = default_sphere_grid(f.dim());
    for (double r : dyadic_radii(20)) worst = std::max(worst, max_abs_entry(mean_matrix_R(f, r, grid)));
  }
  return {worst <= 1e-12, "13 fields x 20 radii, max |R| = " + fmt("%.2e", worst)};
}

Outcome c2_gs_closed_form() {
  double worst = 0.0;
  for (int n : {2, 3}) {
    const auto grid = default_sphere_grid(n);
    for (const char* g : {"r", "1/log(e/r)", "-0.5/log(e^2/r)^2"}) {
      const auto prof = RadialProfile::parse(g);
      const auto f = make_gilbarg_serrin(n, prof);
      for (double r : dyadic_radii(20)) {
        const Mat target = ((1.0 - n) / n) * prof.at_r(r) * Mat::Identity(n, n);
        worst = std::max(worst, max_abs_entry(mean_matrix_R(f, r, grid) - target));
      }
    }
  }
  return {worst <= 1e-10, "3 profiles x n in {2,3} x 20 radii, max deviation " + fmt("%.2e", worst)};
}

Outcome c3_m_infinity() {
  double worst_eig = 0.0, worst_diag = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const MatrixXd M = m_infinity(n);
    Eigen::EigenSolver<MatrixXd> es(M);
    std::vector<double> ev;
    for (int i = 0; i < 2 * n; ++i) {
      worst_eig = std::max(worst_eig, std::abs(es.eigenvalues()(i).imag()));
      ev.push_back(es.eigenvalues()(i).real());
    }
    std::sort(ev.begin(), ev.end());
    for (int i = 0; i < n; ++i) {
      worst_eig = std::max(worst_eig, std::abs(ev[i] + n));
      worst_eig = std::max(worst_eig, std::abs(ev[n + i]));
    }
    MatrixXd D = jordanizer_inverse(n) * M * jordanizer(n);
    for (int i = 0; i < n; ++i) D(n + i, n + i) += n;
    worst_diag = std::max(worst_diag, D.cwiseAbs().maxCoeff());
  }
  return {worst_eig <= 1e-12 && worst_diag <= 1e-12,
          "n = 2..6, eigenvalue error " + fmt("%.2e", worst_eig) + ", off-diagonal " + fmt("%.2e", worst_diag)};
}

Outcome c4_r1_slope() {
  const auto grid = default_sphere_grid(2);
  std::vector<double> lg, lr;
  for (double g : {0.2, 0.1, 0.05, 0.025}) {
    const auto m = appendix_moments(make_gilbarg_serrin(2, RadialProfile::power(4.0 * g, 1.0)), 0.25, grid);
    lg.push_back(std::log(g));
    lr.push_back(std::log(r1_block_residual(m).residual));
  }
  const double s = slope(lg, lr);
  return {s >= 1.8 && s <= 2.2, "log-log slope " + fmt("%.4f", s)};
}

const char* kScalarProfiles[] = {"r", "1/log(e/r)", "-1/log(e/r)^2", "0.5*r^0.5 - 0.2/log(e^3/r)",
                                 "pwlog(0;1:0.4;3:-0.3;10:0.1;40:0)"};

Outcome c5_scalar_oracle() {
  double worst = 0.0;
  for (const char* g : kScalarProfiles) {
    const auto gen = scalar_generator(RadialProfile::parse(g));
    IntegrateOptions o;
    o.tol = 1e-9;
    const auto tr = integrate_system(as_linear_generator(gen, 2), 0.0, 100.0, VectorXd::Ones(1), o);
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      worst = std::max(worst, std::abs(tr.y[k](0) - closed_form_phi(gen, 2, tr.t[k], 1.0)));
    for (int k = 0; k <= 2000; ++k) {
      const double t = 100.0 * k / 2000.0;
      worst = std::max(worst, std::abs(tr.at(t)(0) - closed_form_phi(gen, 2, t, 1.0)));
    }
  }
  return {worst <= 1e-7, "5 profiles on [0, 100], max |phi - closed form| = " + fmt("%.2e", worst)};
}

Outcome c6_square_dini() {
  const auto lg = square_dini_integral(Modulus::parse("1/log(e/r)"), 1e-8);
  double err = std::abs(lg.value() - 1.0);
  bool ok = lg.converges() && err <= 1e-6;
  std::ostringstream os;
  os << "1/log(e/r): " << fmt("%.3e", err);
  for (double a : {0.25, 0.5, 1.0}) {
    const auto ev = square_dini_integral(Modulus::from_profile(RadialProfile::power(1.0, a)), 1e-10);
    const double e = std::abs(ev.value() - 1.0 / (2.0 * a));
    ok = ok && ev.converges() && e <= 1e-8;
    os << ", r^" << a << ": " << fmt("%.3e", e);
  }
  return {ok, os.str()};
}

Outcome c7_gronwall() {
  std::vector<std::pair<LinearGenerator, VectorXd>> gens;
  gens.emplace_back(constant_generator(MatrixXd::Zero(2, 2), "zero"), VectorXd::Ones(2));
  MatrixXd rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  gens.emplace_back(constant_generator(rot, "rotation"), VectorXd::Unit(2, 0));
  for (const char* g : kScalarProfiles)
    gens.emplace_back(as_linear_generator(scalar_generator(RadialProfile::parse(g)), 2), VectorXd::Ones(1));
  gens.emplace_back(as_linear_generator(scalar_generator(RadialProfile::parse("altlog(0.5,2,2)")), 2),
                    VectorXd::Ones(1));
  CesariParams conv;
  CesariParams minus;
  minus.kind = CesariKind::MinusInfinity;
  gens.emplace_back(as_linear_generator(build_cesari_counterexample(conv).gen, 2), VectorXd::Ones(1));
  gens.emplace_back(as_linear_generator(build_cesari_counterexample(minus).gen, 2), VectorXd::Ones(1));

  // Matrix generators from spherical means.
  const auto e11 = make_perturbed_radial(2, RadialMatrix{RadialProfile::parse("r"), Mat::Identity(2, 2)},
                                         e11_perturbation(2, RadialProfile::parse("0.6/log(e/r)")));
  const auto grid = default_sphere_grid(2);
  gens.emplace_back(spherical_mean_generator(e11, grid, 0.0, 1e4), VectorXd::Ones(2));
  const auto gs3 = make_gilbarg_serrin(3, RadialProfile::parse("-0.7/log(e/r)"));
  const auto grid3 = default_sphere_grid(3);
  gens.emplace_back(spherical_mean_generator(gs3, grid3, 0.0, 1e4), VectorXd::Ones(3));

  double worst = 1.0;
  for (const auto& [gen, y0] : gens) {
    IntegrateOptions o;
    o.tol = 1e-10;
    const double T = gen.dim == 1 && gen.breakpoints.size() > 3 ? 1e4 : 200.0;
    const auto tr = integrate_system(gen, 0.0, T, y0, o);
    worst = std::max(worst, gronwall_bound_check(tr, gen).worst_ratio);
  }
  return {worst <= 1.0 + 1e-6, std::to_string(gens.size()) + " generators, worst ratio 1 + " +
                                   fmt("%.2e", worst - 1.0)};
}

bool increasing_run(const std::vector<double>& v, int need) {
  int run = 0, best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    run = v[i] > v[i - 1] ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best >= need;
}

Outcome c8_independence() {
  CesariParams p;
  const auto conv = build_cesari_counterexample(p);
  const auto rc = verify_independence(conv.gen, 2, 1e-9, p.horizon);
  // Read strictly: four successive increases of K_trend.
  const bool asym = rc.asym_constant.verdict == AsymptoticVerdict::EvidenceYes && rc.asym_constant.residual <= 1e-4;
  const bool unst = rc.uniformly_stable.verdict_uniform_stability == StabilityVerdict::EvidenceUnstable &&
                    increasing_run(rc.uniformly_stable.K_trend, 4);
  const bool dini = rc.square_dini.converges();

  CesariParams m = p;
  m.kind = CesariKind::MinusInfinity;
  const auto minus = build_cesari_counterexample(m);
  const auto rm = verify_independence(minus.gen, 2, 1e-9, m.horizon);
  const bool mi = rm.running_integral_at_horizon < -10.0 &&
                  rm.uniformly_stable.verdict_uniform_stability == StabilityVerdict::EvidenceUnstable;
  std::ostringstream os;
  os << "convergent: asym residual " << fmt("%.2e", rc.asym_constant.residual) << ", K_trend "
     << fmt("%.3g", rc.uniformly_stable.K_trend.front()) << " -> " << fmt("%.3g", rc.uniformly_stable.K_trend.back())
     << ", square-Dini " << to_string(rc.square_dini.verdict) << "; minus-infinity: running integral "
     << fmt("%.2f", rm.running_integral_at_horizon) << ", " << to_string(rm.uniformly_stable.verdict_uniform_stability);
  return {asym && unst && dini && mi, os.str()};
}

Outcome c9_perturbation() {
  std::vector<LinearGenerator> bases;
  bases.push_back(constant_generator(MatrixXd::Zero(2, 2), "zero"));
  MatrixXd rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  bases.push_back(constant_generator(rot, "rotation"));
  bases.push_back(as_linear_generator(scalar_generator(RadialProfile::parse("1/log(e/r)")), 2));
  bases.push_back(as_linear_generator(scalar_generator(RadialProfile::parse("-1/log(e/r)^2 + 0.5*r")), 2));
  bases.push_back(as_linear_generator(scalar_generator(RadialProfile::parse("pwlog(0;1:0.4;3:-0.3;10:0.1;40:0)")), 2));

  const auto grid = stability_grid(0.0, 100.0);
  bool ok = true;
  double worst_margin = 0.0;
  std::ostringstream os;
  for (const auto& base : bases) {
    LinearGenerator pert = base;
    const int d = base.dim;
    pert.R = [R = base.R, d](double t) {
      MatrixXd P = MatrixXd::Zero(d, d);
      // Spectral norm 0.1 e^-t, so the L1 norm is 0.1 (1 - e^-T).
      P(0, 0) = (d > 1 ? 0.08 : 0.1) * std::exp(-t);
      if (d > 1) P(0, 1) = -0.06 * std::exp(-t);
      return MatrixXd(R(t) + P);
    };
    const auto rep = perturbation_equivalence(base, pert, grid, 1e-10);
    ok = ok && rep.l1_of_difference <= 0.1 + 1e-9 && rep.bound_holds;
    const double up = std::max(rep.bound_factor, 1.0 / rep.bound_factor);
    worst_margin = std::max(worst_margin, up / rep.allowed_factor);
    os << " " << fmt("%.3g", rep.c_meas);
  }
  return {ok && worst_margin <= 1.0, "5 generators, max factor / e^(c l1) = " + fmt("%.4f", worst_margin) +
                                         ", c_meas:" + os.str()};
}

Outcome c10_pde_manufactured() {
  const auto id = make_constant(2, Mat::Identity(2, 2));
  const auto lin = solve_dirichlet(id, boundary_by_name("x1").f, 256);
  double lin_err = 0.0;
  for (int j = 0; j < lin.N; ++j)
    for (int i = 0; i < lin.N; ++i) lin_err = std::max(lin_err, std::abs(lin.cell(i, j) - lin.centre(i, j)(0)));
  const auto grad = gradient_at_origin(lin, {0.25, 0.125, 0.0625, 0.03125});
  const double grad_err = (grad.limit - Eigen::Vector2d(1.0, 0.0)).cwiseAbs().maxCoeff();

  const auto bc = boundary_by_name("x1^2-x2^2").f;
  std::vector<double> lh, le;
  double orth = 0.0;
  for (int N : {64, 128, 256, 512}) {
    const auto sol = solve_dirichlet(id, bc, N);
    double err = 0.0;
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        const auto c = sol.centre(i, j);
        err = std::max(err, std::abs(sol.cell(i, j) - bc(c(0), c(1))));
      }
    lh.push_back(std::log(sol.h));
    le.push_back(std::log(err));
    if (N == 512) {
      const auto d = spectral_decompose(sol, {0.4, 0.25, 0.125, 0.0625, 0.03125, 0.015625});
      for (std::size_t k = 0; k < d.radii.size(); ++k) orth = std::max({orth, d.w_means[k], d.w_moments[k]});
    }
  }
  const double s = slope(lh, le);
  std::ostringstream os;
  os << "u = x1 error " << fmt("%.2e", lin_err) << ", gradient error " << fmt("%.2e", grad_err) << ", slope "
     << fmt("%.3f", s) << ", orthogonality " << fmt("%.2e", orth);
  return {lin_err <= 1e-10 && grad_err <= 1e-10 && s >= 1.8 && s <= 2.2 && orth <= 1e-8, os.str()};
}

int decreasing_run(const std::vector<Eigen::Vector2d>& v) {
  int run = 0, best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    run = v[i].norm() < v[i - 1].norm() ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

Outcome c11_cross_validation() {
  const std::vector<double> radii{0.25, 0.125, 0.0625, 0.03125, 0.015625};

  const auto neg = make_gilbarg_serrin(2, RadialProfile::parse("-1/log(e^2/r)"));
  const auto vneg = classify(neg, Budget{}, false);
  const bool route = vneg.classification == Classification::DifferentiableWithZeroGradient &&
                     vneg.route == Route::MuDivergence;
  const auto sneg = solve_dirichlet(neg, boundary_by_name("x1").f, 512);
  const auto gneg = gradient_at_origin(sneg, radii);
  // >= 4 dyadic radii with |v| decreasing between each consecutive pair.
  const int dec = decreasing_run(gneg.v);

  const auto pos = make_gilbarg_serrin(2, RadialProfile::parse("1/log(e^2/r)"));
  const auto vpos = classify(pos, Budget{}, true);
  const bool pos_class = vpos.classification == Classification::Inconclusive && vpos.dynamics &&
                         vpos.dynamics->stability.verdict_uniform_stability == StabilityVerdict::EvidenceUnstable;
  const auto spos = solve_dirichlet(pos, boundary_by_name("x1").f, 512);
  const auto q = lipschitz_quotient(spos, radii);

  std::ostringstream os;
  os << "-g: " << to_string(vneg.classification) << " via " << to_string(vneg.route) << ", |v| "
     << fmt("%.3f", gneg.v.front().norm()) << " -> " << fmt("%.3f", gneg.v.back().norm()) << " (" << dec
     << " decreases); +g: " << to_string(vpos.classification) << ", Q " << fmt("%.3f", q.Q.front()) << " -> "
     << fmt("%.3f", q.Q.back()) << " (" << q.increasing_run << " increases)";
  return {route && dec >= 3 && pos_class && q.increasing_run >= 2, os.str()};
}

Outcome c12_hierarchy() {
  std::vector<CoefficientField> fields;
  for (const char* g : {"r", "0.5*r^0.5", "1/log(e/r)^2", "-0.5/log(e/r)^2", "1/log(e/r)", "-1/log(e^2/r)",
                        "pwlog(0;1:0.4;3:-0.3;10:0.1;40:0)", "altlog(0.3,2,2)"}) {
    fields.push_back(make_gilbarg_serrin(2, RadialProfile::parse(g)));
    fields.push_back(make_gilbarg_serrin(3, RadialProfile::parse(g)));
  }
  fields.push_back(make_constant(2, Mat::Identity(2, 2)));
  fields.push_back(make_radial(2, RadialMatrix{RadialProfile::parse("0.4/log(e/r)"), Mat::Identity(2, 2)}));
  fields.push_back(make_perturbed_radial(2, RadialMatrix{RadialProfile::parse("r^0.5"), Mat::Identity(2, 2)},
                                         e11_perturbation(2, RadialProfile::parse("0.8*r^0.5"))));
  fields.push_back(make_perturbed_radial(2, RadialMatrix{RadialProfile::zero(), Mat::Identity(2, 2)},
                                         e11_perturbation(2, RadialProfile::parse("0.5/log(e/r)^2"))));
  const Budget b;
  int passing = 0, violations = 0;
  for (const auto& f : fields) {
    if (!condition_A_minus_I(f, b).converges()) continue;
    ++passing;
    const RadialCache cache(f, b);
    if (!pv_integral_R(cache, b).converges() || !l1_norm_condition(cache, b).converges()) ++violations;
  }
  return {passing >= 8 && violations == 0, std::to_string(fields.size()) + " fields, " + std::to_string(passing) +
                                               " pass the A - I condition, " + std::to_string(violations) +
                                               " fail the pv or L1 condition"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "constant and radial fields give R = 0", 5, c1_annihilation},
      {2, "Gilbarg-Serrin closed form for R", 5, c2_gs_closed_form},
      {3, "M_inf eigenstructure and Jordan form", 1, c3_m_infinity},
      {4, "R1 second-order closeness slope", 5, c4_r1_slope},
      {5, "scalar ODE against closed form", 10, c5_scalar_oracle},
      {6, "square-Dini analytic values", 5, c6_square_dini},
      {7, "Gronwall ratio on built-in generators", 10, c7_gronwall},
      {8, "independence counterexample", 60, c8_independence},
      {9, "L1 perturbation equivalence", 30, c9_perturbation},
      {10, "PDE manufactured solutions", 120, c10_pde_manufactured},
      {11, "classifier and PDE cross-validation", 180, c11_cross_validation},
      {12, "A - I integrability implies the pv and L1 conditions", 30, c12_hierarchy},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s: %s (%.2f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
