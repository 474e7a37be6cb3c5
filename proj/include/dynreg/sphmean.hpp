#pragma once

#include "dynreg/coeff.hpp"
#include "dynreg/quadrature.hpp"
#include "dynreg/types.hpp"

#include <functional>
#include <utility>

namespace dynreg {

/// Radial moment family at one radius.
struct MomentData {
  double r = 0.0;  // 0 when only t is representable
  double t = 0.0;  // log(1/r)
  double alpha = 0.0;
  Vec beta;
  Vec gamma;
  Mat Amat;
  Mat Bmat;
  Mat Cmat;
  Mat R;
  Mat S;
  double mu = 0.0;
};

/// Spherical mean of A - n (A theta) theta^T at r = e^-t.
Mat mean_matrix_R_t(const CoefficientField& field, double t, const SphericalGrid& grid);
Mat mean_matrix_R(const CoefficientField& field, double r, const SphericalGrid& grid);

/// S = -(R + R^T)/2.
template <class Derived>
Mat symmetrized_S(const Eigen::MatrixBase<Derived>& R) {
  return -0.5 * (R + R.transpose());
}

/// Largest eigenvalue of a symmetric matrix.
double mu_max(const Mat& S);

MomentData appendix_moments_t(const CoefficientField& field, double t, const SphericalGrid& grid);
MomentData appendix_moments(const CoefficientField& field, double r, const SphericalGrid& grid);

/// |R - (C - n B)| where R comes from mean_matrix_R and C, B from appendix_moments.
double moment_consistency(const CoefficientField& field, double r, const SphericalGrid& grid);

enum class OrthogonalityHypothesis { MeanZero, FirstMomentZero };

struct OrthogonalityResult {
  double residual_mean = 0.0;     // |mean of theta_i d_i f|
  double residual_moment = 0.0;   // max_i of |mean of d_i f| and |mean of theta_i theta_j d_j f|
  double hypothesis_value = 0.0;  // |mean f| or max_i |mean theta_i f|, as claimed
  bool hypothesis_violated = false;
  std::string diagnostic;
};

/// Conclusion integrals of the orthogonality identity on the sphere of radius r:
///   mean of f zero for all radii           =>  mean of theta_i d_i f = 0
///   mean of theta_i f zero for all radii   =>  mean of d_i f = 0 = mean of theta_i theta_j d_j f
/// Both conclusions are always measured; the hypothesis picks which one is flagged.
OrthogonalityResult orthogonality_check(const std::function<double(const Vec&)>& f,
                                        const std::function<Vec(const Vec&)>& grad, double r,
                                        const SphericalGrid& grid, OrthogonalityHypothesis hypothesis);

}  // namespace dynreg
