#pragma once

#include "dynreg/coeff.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/sphmean.hpp"
#include "dynreg/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <utility>

namespace dynreg {

template <class Scalar>
using BlockMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// [[-I, nI], [(1 - 1/n) I, (1 - n) I]]
template <class Scalar = double>
BlockMatrix<Scalar> m_infinity(int n) {
  if (n < 2) throw DomainError("m_infinity: n >= 2 required");
  const Scalar sn(n);
  BlockMatrix<Scalar> m = BlockMatrix<Scalar>::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = Scalar(-1);
    m(i, n + i) = sn;
    m(n + i, i) = Scalar(1) - Scalar(1) / sn;
    m(n + i, n + i) = Scalar(1) - sn;
  }
  return m;
}

/// J = [[nI, nI], [I, (1 - n) I]]; J^-1 M_inf J = diag(0 I, -n I).
template <class Scalar = double>
BlockMatrix<Scalar> jordanizer(int n) {
  if (n < 2) throw DomainError("jordanizer: n >= 2 required");
  const Scalar sn(n);
  BlockMatrix<Scalar> j = BlockMatrix<Scalar>::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    j(i, i) = sn;
    j(i, n + i) = sn;
    j(n + i, i) = Scalar(1);
    j(n + i, n + i) = Scalar(1) - sn;
  }
  return j;
}

/// Closed form [[(n-1)/n^2 I, I/n], [I/n^2, -I/n]].
template <class Scalar = double>
BlockMatrix<Scalar> jordanizer_inverse(int n) {
  if (n < 2) throw DomainError("jordanizer_inverse: n >= 2 required");
  const Scalar sn(n);
  BlockMatrix<Scalar> j = BlockMatrix<Scalar>::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    j(i, i) = (sn - Scalar(1)) / (sn * sn);
    j(i, n + i) = Scalar(1) / sn;
    j(n + i, i) = Scalar(1) / (sn * sn);
    j(n + i, n + i) = Scalar(-1) / sn;
  }
  return j;
}

/// Perturbation block
///   [[I - A^-1 B,                  A^-1 - nI],
///    [C - B A^-1 B + (1-n)/n I,    B A^-1 - I]]
/// from the moments A, B, C.  Rejects cond(A) > 1e8.
Eigen::MatrixXd s1_matrix(const MomentData& m);

struct R1Residual {
  Eigen::MatrixXd R1;
  double residual = 0.0;     // |R1 - (C - nB)|
  double consistency = 0.0;  // |(C - nB) - R| with R from the direct spherical mean
};

/// R1 = (n-1)/n^2 A^-1 - (n-1)/n A^-1 B + C - B A^-1 B + B A^-1 / n - I.
R1Residual r1_block_residual(const MomentData& m);

/// (phi, psi) = J^-1 V.
std::pair<Eigen::VectorXd, Eigen::VectorXd> transform_to_phi_psi(const Eigen::VectorXd& V, int n);
Eigen::VectorXd transform_from_phi_psi(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi, int n);

struct ReducedSystem {
  int n = 2;
  Eigen::MatrixXd M_inf;
  Eigen::MatrixXd J;
  std::function<Eigen::MatrixXd(double)> S1_at;
  std::function<double(double)> r1_residual_at;
};

ReducedSystem reduced_system(const CoefficientField& field, const SphericalGrid& grid);

/// dV/dt + (M_inf + S1(t)) V = 0 as a generator.
LinearGenerator reduced_generator(const CoefficientField& field, const SphericalGrid& grid);

}  // namespace dynreg
