#pragma once

#include "dynreg/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dynreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// dphi/dt + R(t) phi = 0.  R may jump at `breakpoints`; the integrator
/// restarts there and evaluates R one-sidedly.
struct LinearGenerator {
  int dim = 1;
  std::function<MatrixXd(double)> R;
  std::vector<double> breakpoints;
  std::string description;

  /// Top eigenvalue of -(R + R^T)/2, i.e. mu of B = -R.
  double mu(double t) const;
};

/// Field-free generator from a constant matrix.
LinearGenerator constant_generator(const MatrixXd& R, std::string description = {});

/// Accepted steps with Hermite dense output.
class Trajectory {
 public:
  std::vector<double> t;
  std::vector<VectorXd> y;
  std::vector<VectorXd> dy;  // derivative at each sample, for dense output
  std::vector<VectorXd> dense;  // continuous-extension coefficient of the step ending at sample k (empty if none)
  std::vector<double> step_error;  // error estimate of the step ending at sample k (0 for k = 0)
  int rejected_steps = 0;

  /// Fourth-order continuous extension of the step (cubic Hermite where none is stored);
  /// t outside the range throws.
  VectorXd at(double time) const;
  double t0() const { return t.front(); }
  double t1() const { return t.back(); }
};

struct IntegrateOptions {
  double tol = 1e-9;
  double h_init = 0.0;       // 0 picks a default from the interval length
  double h_max = 0.0;        // 0 means unbounded
  double h_min_rel = 1e-13;  // relative step floor before declaring underflow
  double abs_floor = 0.0;    // error scale is max(|y|, abs_floor) per unit time
  std::vector<double> output_times;  // extra samples, steps are clipped to hit them
};

/// Adaptive Dormand-Prince 5(4).  Local error per unit time <= tol (1 + |y|).
Trajectory integrate_system(const LinearGenerator& gen, double t0, double t1, const VectorXd& phi0,
                            const IntegrateOptions& opts = {});

/// Same integrator for a general right-hand side y' = f(t, y).
Trajectory integrate_rhs(const std::function<VectorXd(double, const VectorXd&)>& f, const std::vector<double>& breakpoints,
                         double t0, double t1, const VectorXd& y0, const IntegrateOptions& opts = {});

struct FundamentalMatrixTrack {
  std::vector<double> t_grid;
  std::vector<MatrixXd> Phi;
  std::vector<double> step_error;  // per interval [t_{k-1}, t_k], first entry 0
  double tol = 0.0;
};

FundamentalMatrixTrack fundamental_matrix(const LinearGenerator& gen, const std::vector<double>& t_grid, double tol);

/// Grid of `windows` dyadically expanding windows [t0, t0 + L 2^(k-windows)],
/// `per_window` points added per window.
std::vector<double> stability_grid(double t0, double t1, int windows = 8, int per_window = 64);

enum class StabilityVerdict { EvidenceStable, EvidenceUnstable, Inconclusive };
enum class AsymptoticVerdict { EvidenceYes, EvidenceNo, Inconclusive };

std::string to_string(StabilityVerdict v);
std::string to_string(AsymptoticVerdict v);

struct AsymptoticLimit {
  AsymptoticVerdict verdict = AsymptoticVerdict::Inconclusive;
  VectorXd phi_inf;
  double residual = 0.0;        // max deviation from phi_inf over the final window
  double prev_residual = 0.0;   // same for the preceding window
  double window_start = 0.0;
  std::string diagnostic;
};

struct StabilityReport {
  double K_hat = 1.0;
  std::vector<double> window_ends;
  std::vector<double> K_trend;
  StabilityVerdict verdict_uniform_stability = StabilityVerdict::Inconclusive;
  double growth_exponent = 0.0;  // slope of log K_trend per window, when unstable
  std::optional<AsymptoticLimit> asymptotic;
  std::string diagnostic;
};

/// K_hat = max over grid pairs t_k >= t_j of |Phi(t_k) Phi(t_j)^-1|_2 and its trend
/// over `windows` dyadically expanding windows.
StabilityReport stability_constant(const FundamentalMatrixTrack& track, int windows = 8);

/// phi_inf = mean over the final window [t1 - f L, t1].
AsymptoticLimit asymptotic_limit(const Trajectory& traj, double window_fraction, double tol);

struct GronwallResult {
  double worst_ratio = 1.0;
  double t_at_worst = 0.0;
  double s_at_worst = 0.0;
};

/// max over s < t of |phi(t)| / (|phi(s)| exp int_s^t mu).
GronwallResult gronwall_bound_check(const Trajectory& traj, const std::function<double(double)>& mu,
                                    const std::vector<double>& breakpoints = {});
GronwallResult gronwall_bound_check(const Trajectory& traj, const LinearGenerator& gen);

struct PerturbationReport {
  double l1_of_difference = 0.0;
  std::vector<double> l1_window_increments;
  double K_hat_R = 1.0;
  double K_hat_Rtil = 1.0;
  double c_meas = 1.0;
  double bound_factor = 1.0;     // K_hat_Rtil / K_hat_R
  double allowed_factor = 1.0;   // exp(c_meas l1)
  bool bound_holds = true;       // both directions
};

/// Stability under an L^1 perturbation.  Throws DomainError when the
/// difference is not integrable on the window.
PerturbationReport perturbation_equivalence(const LinearGenerator& R, const LinearGenerator& Rtil,
                                            const std::vector<double>& t_grid, double tol);

/// Spectral norm of a small dense matrix.
double spectral_norm(const MatrixXd& m);

}  // namespace dynreg
