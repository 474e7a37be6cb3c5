#pragma once

#include "dynreg/coeff.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace dynreg {

using BoundaryData = std::function<double(double x1, double x2)>;

struct NamedBoundary {
  std::string name;
  BoundaryData f;
};

/// "x1", "x1^2-x2^2", "1+x1^2-x2^2", "sin(x1)", "|x|^2"; DomainError otherwise.
NamedBoundary boundary_by_name(const std::string& name);
std::vector<std::string> boundary_names();

/// Cell-centred solution of div(A grad u) = 0 on [-1, 1]^2 with u = bc on the boundary.
struct GridSolution {
  int N = 0;       // cells per side
  double h = 0.0;  // 2 / N
  Eigen::VectorXd u;  // u(i, j) at index j * N + i, centre (-1 + (i + 1/2) h, -1 + (j + 1/2) h)
  BoundaryData boundary;
  CoefficientField field;
  double residual_norm = 0.0;  // |b - K u| / |b|
  int iterations = 0;
  std::vector<double> residual_history;

  double cell(int i, int j) const { return u(static_cast<Eigen::Index>(j) * N + i); }
  Eigen::Vector2d centre(int i, int j) const { return {-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h}; }
  /// Local 4x4 bicubic Lagrange interpolation of the cell values.
  double interpolate(double x1, double x2) const;
};

/// Finite-volume solve with two-point normal fluxes and vertex-centred cross terms.
/// Requires n = 2, N even in [64, 1024].  Throws NumericalError with the residual
/// history when PCG does not reach tol within max_iter.
GridSolution solve_dirichlet(const CoefficientField& field, const BoundaryData& bc, int N, double tol = 1e-14,
                             int max_iter = 20000);

struct SpectralDecomposition {
  std::vector<double> radii;
  std::vector<double> u0;
  std::vector<Eigen::Vector2d> v;  // (2/r) mean u(r theta) theta
  std::vector<double> w_means;     // |mean w|
  std::vector<double> w_moments;   // max_k |mean w theta_k|
  std::vector<double> w_max;       // max |w| on the circle
  int circle_resolution = 0;
};

/// Rejects radii outside (2h, 1/2).
SpectralDecomposition spectral_decompose(const GridSolution& sol, const std::vector<double>& radii,
                                         int circle_resolution = 256);

/// Same decomposition for an analytic function (no grid involved).
SpectralDecomposition spectral_decompose(const std::function<double(double, double)>& u,
                                         const std::vector<double>& radii, int circle_resolution = 256);

enum class QuotientVerdict { Bounded, Unbounded, Inconclusive };
const char* to_string(QuotientVerdict v);

struct LipschitzQuotient {
  std::vector<double> radii;   // decreasing
  std::vector<double> Q;       // max_{|x|=r} |u(x) - u(0)| / r
  std::vector<double> l2_mean; // (mean of u^2 over cells with |y| < r)^(1/2)
  std::vector<double> Q_normalized;  // Q / l2_mean(r_max)
  double u_origin = 0.0;
  int increasing_run = 0;      // longest run of consecutive increases as r decreases
  QuotientVerdict verdict = QuotientVerdict::Inconclusive;
};

/// Bounded iff Q over the last three radii stays within 5%; Unbounded iff Q
/// increases over the last three or more radii.
LipschitzQuotient lipschitz_quotient(const GridSolution& sol, std::vector<double> radii, int circle_resolution = 256);

enum class GradientVerdict { EvidenceConverged, EvidenceNotConverged };
const char* to_string(GradientVerdict v);

struct GradientEstimate {
  std::vector<double> radii;  // decreasing
  std::vector<Eigen::Vector2d> v;
  std::vector<Eigen::Vector2d> extrapolated;  // (4 v(r) - v(2r)) / 3
  Eigen::Vector2d limit = Eigen::Vector2d::Zero();
  double residual = 0.0;
  int decreasing_run = 0;  // longest run of consecutive decreases of |v(r)|
  GradientVerdict verdict = GradientVerdict::EvidenceNotConverged;
};

/// Radii must be dyadic (r_{k+1} = r_k / 2) for the extrapolation.
GradientEstimate gradient_at_origin(const GridSolution& sol, std::vector<double> radii, int circle_resolution = 256);

struct Projection {
  Eigen::VectorXd Pf;
  double idempotence = 0.0;       // max |P(Pf) - Pf|
  double complementarity = 0.0;   // max |P(f - Pf)|
};

/// Pf = mean f + 2 theta . (mean f theta) on uniform circle samples theta_k = 2 pi k / M.
Projection projection_P(const Eigen::VectorXd& samples, int n = 2);

/// |mean (Pf) g - mean f (Pg)| on uniform samples.
double projection_self_adjointness(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// d/dx1 at 0 of the harmonic function on [-1, 1]^2 with boundary values sin(x1) (separation of variables).
double sin_x1_gradient_oracle(int terms = 200);

}  // namespace dynreg
