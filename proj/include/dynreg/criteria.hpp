#pragma once

#include "dynreg/coeff.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/quadrature.hpp"
#include "dynreg/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynreg {

enum class ConvergenceVerdict { Converges, Diverges, Oscillates, Inconclusive };
enum class DivergenceRate { None, Log, Power, ToMinusInfinity };

std::string to_string(ConvergenceVerdict v);
std::string to_string(DivergenceRate r);

/// Partial values of a radial integral truncated at r = 2^-k (k = k_min..k_max),
/// followed by extended checkpoints in log-time t = log(1/r).
struct IntegralEvidence {
  std::string name;
  std::vector<int> k;
  std::vector<Mat> partial_values;
  std::vector<double> ext_t;
  std::vector<Mat> ext_values;
  ConvergenceVerdict verdict = ConvergenceVerdict::Inconclusive;
  DivergenceRate rate = DivergenceRate::None;
  Mat limit;
  double residual = 0.0;
  std::string diagnostic;

  bool converges() const { return verdict == ConvergenceVerdict::Converges; }
  double value() const { return limit.size() ? limit(0, 0) : 0.0; }
};

struct Budget {
  double eps = 0.5;
  int k_max = 20;
  double tol = 1e-8;
  int grid_resolution = 0;  // 0: sphere default
  double t_ext = 1e15;      // last extended checkpoint
  // dynamical-system window
  double t0 = 0.6931471805599453;  // log 2
  double t_horizon = 2000.0;
  double dyn_tol = 1e-9;
  double asym_tol = 1e-4;
  double window_fraction = 0.05;
  double K_max = std::numeric_limits<double>::infinity();

  SphericalGrid grid(int n) const;
};

/// Log-time checkpoints: t_lo, then k log 2 for dyadic k up to k_max, then
/// geometric T 2^j (T = k_max log 2) up to t_ext.
struct Checkpoints {
  std::vector<double> edges;
  std::vector<int> k;  // dyadic level of each edge, -1 if not dyadic
  std::size_t first_geometric = 0;  // index of T in edges
};
Checkpoints checkpoints(double t_lo, int k_max, double t_ext);

/// Builds evidence from a scalar or matrix integrand of log-time over [t_lo, t_ext].
IntegralEvidence integral_evidence(const std::string& name, const std::function<Mat(double)>& f, double t_lo,
                                   const Budget& budget, const std::vector<double>& breakpoints = {});
/// Evidence from ordered partial values (applies the verdict rules only).
void classify_partials(IntegralEvidence& ev, double tol);

/// R(t) sampled once on an adaptive partition; shared by the R-based criteria.
class RadialCache {
 public:
  RadialCache(const CoefficientField& field, const Budget& budget);
  const PiecewiseSamples& R() const { return R_; }
  const PiecewiseSamples& mu() const { return mu_; }
  const Checkpoints& marks() const { return marks_; }
  double t_lo() const { return t_lo_; }
  int dim() const { return n_; }

 private:
  int n_;
  double t_lo_;
  Checkpoints marks_;
  PiecewiseSamples R_;
  PiecewiseSamples mu_;
};

/// Evidence from samples on a partition whose edges include `marks`.
IntegralEvidence evidence_from_samples(const std::string& name, const PiecewiseSamples& s, const Checkpoints& marks,
                                       double tol);

IntegralEvidence dini_integral(const Modulus& omega, double eps, double tol, const Budget& budget = {});
IntegralEvidence square_dini_integral(const Modulus& omega, double tol, const Budget& budget = {});

/// int_{r1}^{r2} mu(S(rho)) drho/rho by adaptive quadrature.
double mu_window_integral(const CoefficientField& field, double r1, double r2, const SphericalGrid& grid, double tol);

/// Running sup over windows eps > r2 > r1 > 2^-k of the mu window integral.
IntegralEvidence check_window_condition(const RadialCache& cache, const Budget& budget);
IntegralEvidence pv_integral_R(const RadialCache& cache, const Budget& budget);
IntegralEvidence l1_norm_condition(const RadialCache& cache, const Budget& budget);

struct IteratedReport {
  IntegralEvidence level1_a, level1_b, level2_a, level2_b;
};
IteratedReport iterated_condition(const RadialCache& cache, const Budget& budget);
IntegralEvidence divergence_condition(const RadialCache& cache, const Budget& budget);

/// Principal-value shells of int_{|x|<r} (A - n (A x/|x|) (x/|x|)^T) dx/|x|^n in
/// Cartesian coordinates with unnormalized sphere measure.
IntegralEvidence volume_integral_form(const CoefficientField& field, double r, const Budget& budget);
/// |S^{n-1}|.
double sphere_area(int n);

IntegralEvidence condition_A_minus_I(const CoefficientField& field, const Budget& budget);

enum class Classification { Inconclusive, LipschitzAtOrigin, DifferentiableAtOrigin, DifferentiableWithZeroGradient };
enum class Route { None, MuWindowBound, ConditionalRIntegral, IteratedRIntegral, AbsoluteIntegrability, MuDivergence,
                   DynamicalSystem };

std::string to_string(Classification c);
std::string to_string(Route r);

struct DynamicsEvidence {
  StabilityReport stability;
  double K_hat_at_2t0 = 1.0;  // sensitivity rerun
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Fundamental matrix of dphi/dt + R(e^-t) phi = 0 on [t0, t_horizon].
/// R(t) of the field by spherical quadrature; captures the field by reference.
LinearGenerator spherical_mean_generator(const CoefficientField& field, const SphericalGrid& grid, double t_lo,
                                         double t_hi);
DynamicsEvidence dynamics_evidence(const CoefficientField& field, const Budget& budget);

struct RegularityVerdict {
  Classification classification = Classification::Inconclusive;
  Route route = Route::None;
  Classification analytic_classification = Classification::Inconclusive;
  Classification dynamics_classification = Classification::Inconclusive;
  std::map<std::string, IntegralEvidence> evidence;
  std::optional<DynamicsEvidence> dynamics;
  ModulusDiagnostics modulus_diagnostics;
  std::vector<std::string> notes;
};

RegularityVerdict classify(const CoefficientField& field, const Budget& budget = {}, bool with_dynamics = true);

}  // namespace dynreg
