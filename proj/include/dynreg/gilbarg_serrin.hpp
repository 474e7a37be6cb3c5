#pragma once

#include "dynreg/coeff.hpp"
#include "dynreg/criteria.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/profile.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dynreg {

/// gtil(t) = g(e^-t) with its discontinuities and, when known, its exact integral.
struct ScalarGenerator {
  std::function<double(double)> gtil;
  std::vector<double> breakpoints;
  std::optional<double> envelope_C;         // |gtil(t)| <= C (1 + t)^-a
  std::optional<double> envelope_exponent;  // a
  std::function<double(double, double)> analytic_integral;  // int_a^b gtil, empty when unknown
  std::optional<RadialProfile> profile;
  std::string description;
};

ScalarGenerator scalar_generator(const RadialProfile& g);

/// gtil of a Gilbarg-Serrin field; cross-checks the spherical-mean R against
/// ((1-n)/n) gtil I at sample times (throws NumericalError beyond 1e-10).
ScalarGenerator scalar_reduction(const CoefficientField& field);

/// dphi/dt = ((n-1)/n) gtil phi written as dphi/dt + R phi = 0.
LinearGenerator as_linear_generator(const ScalarGenerator& gen, int n);

/// phi0 exp(((n-1)/n) int_{t_start}^t gtil).
double closed_form_phi(const ScalarGenerator& gen, int n, double t, double phi0, double t_start = 0.0);

enum class CesariKind { ConvergentImproper, MinusInfinity };

struct CesariBlock {
  double T = 0.0;         // block occupies [T, 2T): + on [T, 1.25T), - on [1.25T, 1.75T), 0 after
  double height_pos = 0.0;
  double height_neg = 0.0;
  double b = 0.0;         // integral of the positive plateau
  double c = 0.0;         // extra cancellation: negative plateau integrates to -(b + c)
  double running_after = 0.0;  // int_0^{2T} gtil
};

struct CesariParams {
  CesariKind kind = CesariKind::ConvergentImproper;
  double decay_exponent = 2.0 / 3.0;
  double horizon = 1e4;
  double C = 3.0;
  double fill = 0.9;            // plateau height as a fraction of the envelope
  double max_height = 0.5;      // keeps 1 + g >= 1/2
  double min_block_sup = 5.0;   // required largest window sup
};

struct CesariGenerator {
  ScalarGenerator gen;
  CesariParams params;
  std::vector<CesariBlock> blocks;
  double running_integral_at_horizon = 0.0;
  double max_window_sup = 0.0;
};

/// Sign-changing plateaus on geometric blocks T_j = H 2^-m under the envelope
/// C (1 + t)^-a.  Rejects parameter sets whose largest block sum stays below
/// min_block_sup.
CesariGenerator build_cesari_counterexample(const CesariParams& params);

struct IndependenceReport {
  AsymptoticLimit asym_constant;
  StabilityReport uniformly_stable;
  IntegralEvidence square_dini;
  double running_integral_at_horizon = 0.0;
  double max_window_sup = 0.0;
  double gronwall_ratio = 1.0;
  double horizon = 0.0;
};

/// Runs the stability and asymptotic tests on the scalar system over [0, horizon].
IndependenceReport verify_independence(const ScalarGenerator& gen, int n, double tol, double horizon,
                                       double asym_tol = 1e-4, double window_fraction = 0.05);

struct ModeSolution {
  std::vector<double> r;
  std::vector<double> v;
  std::vector<double> rv_prime;  // r dv/dr
  std::vector<double> phi;       // (phi, psi) = J^-1 (v, flux)
  std::vector<double> psi;
  double t_start = 0.0;          // deep start t = log(1/r_min)
  double full_system_deviation = 0.0;  // relative deviation from the 2n reduced system
  double scalar_log_deviation = 0.0;   // max |log(phi / phi_scalar)|
  double scalar_bound = 0.0;           // int gtil^2 over the window
  std::optional<double> truncation_radius;
};

/// Regular mode v(r) of the Gilbarg-Serrin ODE (u = v(r) x_1), normalized v(1) = 1.
/// Integrated outward from r = e^-t_start where (phi, psi) = (1, 0).
ModeSolution gs_mode_ode_solution(const RadialProfile& g, int n, const std::vector<double>& r_grid, double tol,
                                  double t_start = 200.0, bool cross_check = true);

}  // namespace dynreg
