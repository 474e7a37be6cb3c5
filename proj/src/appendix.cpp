#include "dynreg/appendix.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <sstream>

namespace dynreg {

namespace {

Eigen::MatrixXd checked_inverse(const Mat& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e8)) {
    std::ostringstream os;
    os << "moment matrix A is near-singular (condition " << cond
       << "); the field is too far from the identity for the first-order reduction";
    throw DomainError(os.str());
  }
  return Eigen::MatrixXd(A).inverse();
}

}  // namespace

Eigen::MatrixXd s1_matrix(const MomentData& m) {
  const auto n = m.Amat.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ai = checked_inverse(m.Amat);
  const Eigen::MatrixXd B = m.Bmat;
  const Eigen::MatrixXd C = m.Cmat;
  const double dn = static_cast<double>(n);
  Eigen::MatrixXd s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = I - Ai * B;
  s.topRightCorner(n, n) = Ai - dn * I;
  s.bottomLeftCorner(n, n) = C - B * Ai * B + ((1.0 - dn) / dn) * I;
  s.bottomRightCorner(n, n) = B * Ai - I;
  return s;
}

R1Residual r1_block_residual(const MomentData& m) {
  const auto n = m.Amat.rows();
  const double dn = static_cast<double>(n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ai = checked_inverse(m.Amat);
  const Eigen::MatrixXd B = m.Bmat;
  const Eigen::MatrixXd C = m.Cmat;
  R1Residual out;
  out.R1 = ((dn - 1.0) / (dn * dn)) * Ai - ((dn - 1.0) / dn) * Ai * B + C - B * Ai * B + (1.0 / dn) * B * Ai - I;
  const Eigen::MatrixXd cnb = C - dn * B;
  out.residual = max_abs_entry(out.R1 - cnb);
  out.consistency = max_abs_entry(cnb - Eigen::MatrixXd(m.R));
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> transform_to_phi_psi(const Eigen::VectorXd& V, int n) {
  if (V.size() != 2 * n) throw DomainError("transform_to_phi_psi: V must have length 2n");
  const Eigen::VectorXd x = jordanizer_inverse<double>(n) * V;
  return {x.head(n), x.tail(n)};
}

Eigen::VectorXd transform_from_phi_psi(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi, int n) {
  if (phi.size() != n || psi.size() != n) throw DomainError("transform_from_phi_psi: phi, psi must have length n");
  Eigen::VectorXd x(2 * n);
  x << phi, psi;
  return jordanizer<double>(n) * x;
}

ReducedSystem reduced_system(const CoefficientField& field, const SphericalGrid& grid) {
  ReducedSystem sys;
  sys.n = field.dim();
  sys.M_inf = m_infinity<double>(sys.n);
  sys.J = jordanizer<double>(sys.n);
  sys.S1_at = [&field, grid](double t) { return s1_matrix(appendix_moments_t(field, t, grid)); };
  sys.r1_residual_at = [&field, grid](double t) { return r1_block_residual(appendix_moments_t(field, t, grid)).residual; };
  return sys;
}

LinearGenerator reduced_generator(const CoefficientField& field, const SphericalGrid& grid) {
  LinearGenerator gen;
  const int n = field.dim();
  gen.dim = 2 * n;
  const Eigen::MatrixXd M = m_infinity<double>(n);
  gen.R = [&field, grid, M](double t) -> Eigen::MatrixXd { return M + s1_matrix(appendix_moments_t(field, t, grid)); };
  gen.breakpoints = field.modulus().breakpoints(0.0, 1e9);
  gen.description = "reduced first-order system of " + field.description();
  return gen;
}

}  // namespace dynreg
