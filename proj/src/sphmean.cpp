#include "dynreg/sphmean.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace dynreg {

Mat mean_matrix_R_t(const CoefficientField& field, double t, const SphericalGrid& grid) {
  const int n = field.dim();
  if (grid.dim != n) throw DomainError("sphere grid dimension does not match the field");
  // mean(I - n theta theta^T) = 0 exactly, so only A - I enters; this keeps
  // the grid's rounding in that identity out of R and R relatively accurate
  // when A - I is tiny.
  Mat acc = Mat::Zero(n, n);
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const Vec& th = grid.nodes[k];
    const Mat d = field.deviation_polar(t, th);
    acc += grid.weights[k] * (d - n * (d * th) * th.transpose());
  }
  return acc;
}

Mat mean_matrix_R(const CoefficientField& field, double r, const SphericalGrid& grid) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("mean_matrix_R: 0 < r < 1 required");
  return mean_matrix_R_t(field, -std::log(r), grid);
}

double mu_max(const Mat& S) {
  if (S.size() == 0) return 0.0;
  if (S.rows() == 1) return S(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

MomentData appendix_moments_t(const CoefficientField& field, double t, const SphericalGrid& grid) {
  const int n = field.dim();
  if (grid.dim != n) throw DomainError("sphere grid dimension does not match the field");
  MomentData m;
  m.t = t;
  m.r = std::exp(-t);
  m.beta = Vec::Zero(n);
  m.gamma = Vec::Zero(n);
  m.Amat = Mat::Zero(n, n);
  m.Bmat = Mat::Zero(n, n);
  m.Cmat = Mat::Zero(n, n);
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const double w = grid.weights[k];
    const Vec& th = grid.nodes[k];
    const Mat a = field.eval_polar(t, th);
    const Vec ath = a * th;
    const double q = th.dot(ath);
    m.alpha += w * q;
    m.beta += (w * q) * th;
    m.gamma += w * ath;
    m.Amat += (w * q) * th * th.transpose();
    m.Bmat += w * ath * th.transpose();
    m.Cmat += w * a;
  }
  m.R = mean_matrix_R_t(field, t, grid);
  m.S = symmetrized_S(m.R);
  m.mu = mu_max(m.S);
  return m;
}

MomentData appendix_moments(const CoefficientField& field, double r, const SphericalGrid& grid) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("appendix_moments: 0 < r < 1 required");
  MomentData m = appendix_moments_t(field, -std::log(r), grid);
  m.r = r;
  return m;
}

double moment_consistency(const CoefficientField& field, double r, const SphericalGrid& grid) {
  const MomentData m = appendix_moments(field, r, grid);
  return max_abs_entry(m.R - (m.Cmat - field.dim() * m.Bmat));
}

OrthogonalityResult orthogonality_check(const std::function<double(const Vec&)>& f,
                                        const std::function<Vec(const Vec&)>& grad, double r,
                                        const SphericalGrid& grid, OrthogonalityHypothesis hypothesis) {
  const int n = grid.dim;
  double mean_f = 0.0;
  Vec mom_f = Vec::Zero(n);
  double radial = 0.0;
  Vec mean_grad = Vec::Zero(n);
  Vec second = Vec::Zero(n);
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const double w = grid.weights[k];
    const Vec& th = grid.nodes[k];
    const Vec x = r * th;
    const double fx = f(x);
    const Vec gx = grad(x);
    mean_f += w * fx;
    mom_f += (w * fx) * th;
    const double dr = th.dot(gx);
    radial += w * dr;
    mean_grad += w * gx;
    second += (w * dr) * th;
  }
  OrthogonalityResult out;
  out.residual_mean = std::abs(radial);
  out.residual_moment = std::max(mean_grad.cwiseAbs().maxCoeff(), second.cwiseAbs().maxCoeff());
  out.hypothesis_value =
      hypothesis == OrthogonalityHypothesis::MeanZero ? std::abs(mean_f) : mom_f.cwiseAbs().maxCoeff();
  const double scale = 1e-12;
  if (out.hypothesis_value > scale) {
    out.hypothesis_violated = true;
    std::ostringstream os;
    os << (hypothesis == OrthogonalityHypothesis::MeanZero ? "mean of f" : "first moment of f") << " is "
       << out.hypothesis_value << " at r = " << r << "; the hypothesis does not hold";
    out.diagnostic = os.str();
  }
  return out;
}

}  // namespace dynreg
