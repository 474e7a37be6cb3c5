#include "dynreg/pde.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dynreg {

NamedBoundary boundary_by_name(const std::string& name) {
  if (name == "x1") return {name, [](double x, double) { return x; }};
  if (name == "x1^2-x2^2") return {name, [](double x, double y) { return x * x - y * y; }};
  if (name == "1+x1^2-x2^2") return {name, [](double x, double y) { return 1.0 + x * x - y * y; }};
  if (name == "sin(x1)") return {name, [](double x, double) { return std::sin(x); }};
  if (name == "|x|^2") return {name, [](double x, double y) { return x * x + y * y; }};
  std::ostringstream os;
  os << "unknown boundary data '" << name << "'; expected one of:";
  for (const auto& n : boundary_names()) os << ' ' << n;
  throw DomainError(os.str());
}

std::vector<std::string> boundary_names() { return {"x1", "x1^2-x2^2", "1+x1^2-x2^2", "sin(x1)", "|x|^2"}; }

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

std::array<double, 4> lagrange4(double s) {
  // nodes 0, 1, 2, 3
  return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0, -s * (s - 1) * (s - 3) / 2.0,
          s * (s - 1) * (s - 2) / 6.0};
}

// Cell value as an affine form: either an unknown or a mirrored ghost 2 bc - u_inner.
struct Affine {
  int idx = -1;
  double coef = 0.0;
  double shift = 0.0;
};

}  // namespace

double GridSolution::interpolate(double x1, double x2) const {
  const double sx = (x1 + 1.0) / h - 0.5;
  const double sy = (x2 + 1.0) / h - 0.5;
  const int i0 = std::clamp(static_cast<int>(std::floor(sx)) - 1, 0, N - 4);
  const int j0 = std::clamp(static_cast<int>(std::floor(sy)) - 1, 0, N - 4);
  const auto wx = lagrange4(sx - i0);
  const auto wy = lagrange4(sy - j0);
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * cell(i0 + a, j0 + b);
    s += wy[b] * row;
  }
  return s;
}

GridSolution solve_dirichlet(const CoefficientField& field, const BoundaryData& bc, int N, double tol, int max_iter) {
  if (field.dim() != 2) throw DomainError("solve_dirichlet: only n = 2 is supported");
  if (N < 64 || N > 1024 || N % 2 != 0) throw DomainError("solve_dirichlet: N must be even and in [64, 1024]");
  if (!(tol > 0.0)) throw DomainError("solve_dirichlet: tol must be positive");
  const double h = 2.0 / N;
  const Eigen::Index n_unk = static_cast<Eigen::Index>(N) * N;
  auto idx = [N](int i, int j) { return j * N + i; };
  auto A_at = [&field](double x, double y) {
    Vec p(2);
    p << x, y;
    return field.eval(p);
  };
  auto xc = [h](int i) { return -1.0 + (i + 0.5) * h; };

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n_unk) * 13);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_unk);

  auto pair_term = [&](int p, int q, double T) {
    trip.emplace_back(p, p, T);
    trip.emplace_back(q, q, T);
    trip.emplace_back(p, q, -T);
    trip.emplace_back(q, p, -T);
  };
  auto bdry_term = [&](int p, double T, double ub) {
    trip.emplace_back(p, p, T);
    b(p) += T * ub;
  };

  // Normal fluxes.
  for (int j = 0; j < N; ++j) {
    const double y = xc(j);
    for (int i = 0; i <= N; ++i) {
      const double x = -1.0 + i * h;
      const double a11 = A_at(x, y)(0, 0);
      if (i == 0) bdry_term(idx(0, j), 2.0 * a11, bc(x, y));
      else if (i == N) bdry_term(idx(N - 1, j), 2.0 * a11, bc(x, y));
      else pair_term(idx(i - 1, j), idx(i, j), a11);
    }
  }
  for (int i = 0; i < N; ++i) {
    const double x = xc(i);
    for (int j = 0; j <= N; ++j) {
      const double y = -1.0 + j * h;
      const double a22 = A_at(x, y)(1, 1);
      if (j == 0) bdry_term(idx(i, 0), 2.0 * a22, bc(x, y));
      else if (j == N) bdry_term(idx(i, N - 1), 2.0 * a22, bc(x, y));
      else pair_term(idx(i, j - 1), idx(i, j), a22);
    }
  }

  // Cross terms on vertex-centred dual cells: energy w a12 h^2 D1 D2.
  auto cell_form = [&](int i, int j) -> Affine {
    const bool in_i = i >= 0 && i < N, in_j = j >= 0 && j < N;
    if (in_i && in_j) return {idx(i, j), 1.0, 0.0};
    if (!in_i && !in_j) return {};
    if (!in_i) {
      const int ii = i < 0 ? 0 : N - 1;
      const double xb = i < 0 ? -1.0 : 1.0;
      return {idx(ii, j), -1.0, 2.0 * bc(xb, xc(j))};
    }
    const int jj = j < 0 ? 0 : N - 1;
    const double yb = j < 0 ? -1.0 : 1.0;
    return {idx(i, jj), -1.0, 2.0 * bc(xc(i), yb)};
  };
  for (int q = 0; q <= N; ++q) {
    for (int p = 0; p <= N; ++p) {
      const bool edge_p = p == 0 || p == N, edge_q = q == 0 || q == N;
      if (edge_p && edge_q) continue;
      const double a12 = A_at(-1.0 + p * h, -1.0 + q * h)(0, 1);
      if (a12 == 0.0) continue;
      const double w = (edge_p || edge_q) ? 0.5 : 1.0;
      // corners: (p-1,q-1), (p,q-1), (p-1,q), (p,q)
      const std::array<Affine, 4> c{cell_form(p - 1, q - 1), cell_form(p, q - 1), cell_form(p - 1, q), cell_form(p, q)};
      const std::array<double, 4> d{-1.0, 1.0, -1.0, 1.0};
      const std::array<double, 4> e{-1.0, -1.0, 1.0, 1.0};
      double beta_d = 0.0, beta_e = 0.0;
      for (int k = 0; k < 4; ++k) {
        beta_d += d[k] * c[k].shift;
        beta_e += e[k] * c[k].shift;
      }
      const double s = 0.25 * w * a12;
      for (int k = 0; k < 4; ++k) {
        const double ad = d[k] * c[k].coef, ae = e[k] * c[k].coef;
        b(c[k].idx) -= s * (ad * beta_e + ae * beta_d);
        for (int l = 0; l < 4; ++l) {
          const double v = s * (ad * e[l] * c[l].coef + ae * d[l] * c[l].coef);
          if (v != 0.0) trip.emplace_back(c[k].idx, c[l].idx, v);
        }
      }
    }
  }

  Eigen::SparseMatrix<double> K(n_unk, n_unk);
  K.setFromTriplets(trip.begin(), trip.end());
  trip.clear();
  trip.shrink_to_fit();

  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>> ic;
  ic.compute(K);
  if (ic.info() != Eigen::Success) throw NumericalError("solve_dirichlet: incomplete Cholesky factorization failed");

  GridSolution sol;
  sol.N = N;
  sol.h = h;
  sol.boundary = bc;
  sol.field = field;
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_unk);
  if (bnorm == 0.0) {
    sol.u = x;
    return sol;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = ic.solve(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd Kp(n_unk);
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  sol.residual_history.push_back(rel);
  while (rel > tol && it < max_iter) {
    Kp.noalias() = K * p;
    const double alpha = rz / p.dot(Kp);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * Kp;
    ++it;
    rel = r.norm() / bnorm;
    sol.residual_history.push_back(rel);
    if (rel <= tol) break;
    z = ic.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  sol.iterations = it;
  sol.residual_norm = (b - K * x).norm() / bnorm;
  if (!(sol.residual_norm <= 10.0 * tol)) {
    std::ostringstream os;
    os << "solve_dirichlet: PCG did not reach relative residual " << tol << " in " << it
       << " iterations; history (every 50th):";
    for (std::size_t k = 0; k < sol.residual_history.size(); k += 50) os << ' ' << sol.residual_history[k];
    os << " final " << sol.residual_norm;
    throw NumericalError(os.str());
  }
  sol.u = std::move(x);
  return sol;
}

namespace {

SpectralDecomposition decompose_impl(const std::function<double(double, double)>& u, const std::vector<double>& radii,
                                     int M) {
  if (M < 8) throw DomainError("spectral_decompose: circle_resolution >= 8 required");
  SpectralDecomposition out;
  out.circle_resolution = M;
  out.radii = radii;
  std::vector<double> c(M), s(M), vals(M);
  for (int k = 0; k < M; ++k) {
    const double th = 2.0 * std::numbers::pi * k / M;
    c[k] = std::cos(th);
    s[k] = std::sin(th);
  }
  for (double r : radii) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int k = 0; k < M; ++k) {
      vals[k] = u(r * c[k], r * s[k]);
      m0 += vals[k];
      m1 += vals[k] * c[k];
      m2 += vals[k] * s[k];
    }
    m0 /= M;
    m1 /= M;
    m2 /= M;
    const Eigen::Vector2d v(2.0 * m1 / r, 2.0 * m2 / r);
    double w0 = 0.0, w1 = 0.0, w2 = 0.0, wmax = 0.0;
    for (int k = 0; k < M; ++k) {
      const double w = vals[k] - m0 - r * (v(0) * c[k] + v(1) * s[k]);
      w0 += w;
      w1 += w * c[k];
      w2 += w * s[k];
      wmax = std::max(wmax, std::abs(w));
    }
    out.u0.push_back(m0);
    out.v.push_back(v);
    out.w_means.push_back(std::abs(w0 / M));
    out.w_moments.push_back(std::max(std::abs(w1 / M), std::abs(w2 / M)));
    out.w_max.push_back(wmax);
  }
  return out;
}

void check_radii(const GridSolution& sol, const std::vector<double>& radii) {
  for (double r : radii) {
    if (!(r > 2.0 * sol.h && r < 0.5)) {
      std::ostringstream os;
      os << "radius " << r << " outside (2h, 1/2) = (" << 2.0 * sol.h << ", 0.5); interpolation unreliable";
      throw DomainError(os.str());
    }
  }
}

}  // namespace

SpectralDecomposition spectral_decompose(const GridSolution& sol, const std::vector<double>& radii,
                                         int circle_resolution) {
  check_radii(sol, radii);
  return decompose_impl([&sol](double x, double y) { return sol.interpolate(x, y); }, radii, circle_resolution);
}

SpectralDecomposition spectral_decompose(const std::function<double(double, double)>& u,
                                         const std::vector<double>& radii, int circle_resolution) {
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("spectral_decompose: radii must be positive");
  return decompose_impl(u, radii, circle_resolution);
}

const char* to_string(QuotientVerdict v) {
  switch (v) {
    case QuotientVerdict::Bounded: return "Bounded";
    case QuotientVerdict::Unbounded: return "Unbounded";
    case QuotientVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(GradientVerdict v) {
  return v == GradientVerdict::EvidenceConverged ? "EvidenceConverged" : "EvidenceNotConverged";
}

LipschitzQuotient lipschitz_quotient(const GridSolution& sol, std::vector<double> radii, int circle_resolution) {
  std::sort(radii.begin(), radii.end(), std::greater<>());
  check_radii(sol, radii);
  LipschitzQuotient out;
  out.radii = radii;
  out.u_origin = sol.interpolate(0.0, 0.0);
  const int M = circle_resolution;
  for (double r : radii) {
    double q = 0.0;
    for (int k = 0; k < M; ++k) {
      const double th = 2.0 * std::numbers::pi * k / M;
      q = std::max(q, std::abs(sol.interpolate(r * std::cos(th), r * std::sin(th)) - out.u_origin));
    }
    out.Q.push_back(q / r);
    // cells whose centres lie in the disk |y| < r
    double s2 = 0.0;
    int cnt = 0;
    const int lo = std::max(0, static_cast<int>(std::floor((1.0 - r) / sol.h)) - 1);
    const int hi = std::min(sol.N - 1, static_cast<int>(std::ceil((1.0 + r) / sol.h)) + 1);
    for (int j = lo; j <= hi; ++j)
      for (int i = lo; i <= hi; ++i)
        if (sol.centre(i, j).norm() < r) {
          s2 += sol.cell(i, j) * sol.cell(i, j);
          ++cnt;
        }
    out.l2_mean.push_back(cnt > 0 ? std::sqrt(s2 / cnt) : std::abs(out.u_origin));
  }
  const double norm0 = out.l2_mean.empty() ? 0.0 : out.l2_mean.front();
  for (double q : out.Q) out.Q_normalized.push_back(norm0 > 0.0 ? q / norm0 : q);

  const std::size_t m = out.Q.size();
  int run = 1, trailing = m > 0 ? 1 : 0;
  for (std::size_t k = 1; k < m; ++k) {
    run = out.Q[k] > out.Q[k - 1] ? run + 1 : 1;
    out.increasing_run = std::max(out.increasing_run, run);
    trailing = run;
  }
  if (m == 1) out.increasing_run = 1;
  if (m >= 3) {
    const double a = out.Q[m - 3], b = out.Q[m - 2], c = out.Q[m - 1];
    const double mx = std::max({a, b, c}), mn = std::min({a, b, c});
    if (trailing >= 3 && out.Q[m - 1] > 1.05 * out.Q[m - trailing]) out.verdict = QuotientVerdict::Unbounded;
    else if (mx <= 1.05 * mn) out.verdict = QuotientVerdict::Bounded;
  }
  return out;
}

GradientEstimate gradient_at_origin(const GridSolution& sol, std::vector<double> radii, int circle_resolution) {
  std::sort(radii.begin(), radii.end(), std::greater<>());
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (std::abs(radii[k - 1] - 2.0 * radii[k]) > 1e-12 * radii[k - 1])
      throw DomainError("gradient_at_origin: radii must be dyadic (each half the previous)");
  const SpectralDecomposition dec = spectral_decompose(sol, radii, circle_resolution);
  GradientEstimate out;
  out.radii = radii;
  out.v = dec.v;
  const std::size_t m = out.v.size();
  if (m == 0) return out;
  for (std::size_t k = 1; k < m; ++k) out.extrapolated.push_back((4.0 * out.v[k] - out.v[k - 1]) / 3.0);
  out.limit = out.extrapolated.empty() ? out.v.back() : out.extrapolated.back();
  if (out.extrapolated.size() >= 2)
    out.residual = (out.extrapolated.back() - out.extrapolated[out.extrapolated.size() - 2]).norm();
  int run = 1;
  out.decreasing_run = 1;
  for (std::size_t k = 1; k < m; ++k) {
    run = out.v[k].norm() < out.v[k - 1].norm() ? run + 1 : 1;
    out.decreasing_run = std::max(out.decreasing_run, run);
  }
  // Differences below the solve/interpolation noise floor count as converged.
  bool converged = m >= 3;
  for (std::size_t k = 2; k < m; ++k) {
    const double floor = 1e-9 * std::max(1.0, out.v[k].norm());
    const double d_prev = (out.v[k - 1] - out.v[k - 2]).norm();
    const double d = (out.v[k] - out.v[k - 1]).norm();
    if (d > std::max(d_prev, floor)) converged = false;
  }
  out.verdict = converged ? GradientVerdict::EvidenceConverged : GradientVerdict::EvidenceNotConverged;
  return out;
}

namespace {

Eigen::VectorXd apply_P(const Eigen::VectorXd& f) {
  const auto M = f.size();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  Eigen::VectorXd c(M), s(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    c(k) = std::cos(th);
    s(k) = std::sin(th);
    m0 += f(k);
    m1 += f(k) * c(k);
    m2 += f(k) * s(k);
  }
  const double dm = static_cast<double>(M);
  return Eigen::VectorXd::Constant(M, m0 / dm) + (2.0 * m1 / dm) * c + (2.0 * m2 / dm) * s;
}

}  // namespace

Projection projection_P(const Eigen::VectorXd& samples, int n) {
  if (n != 2) throw DomainError("projection_P: circle samples require n = 2");
  if (samples.size() < 3) throw DomainError("projection_P: at least 3 samples required");
  Projection out;
  out.Pf = apply_P(samples);
  out.idempotence = (apply_P(out.Pf) - out.Pf).cwiseAbs().maxCoeff();
  out.complementarity = apply_P(samples - out.Pf).cwiseAbs().maxCoeff();
  return out;
}

double projection_self_adjointness(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != g.size() || f.size() < 3) throw DomainError("projection_self_adjointness: sample size mismatch");
  const double M = static_cast<double>(f.size());
  return std::abs(apply_P(f).dot(g) / M - f.dot(apply_P(g)) / M);
}

double sin_x1_gradient_oracle(int terms) {
  const double pi = std::numbers::pi;
  const double s1 = std::sin(1.0);
  double d = 0.0;
  // sides x1 = +-1 carry +-sin 1: cos(lambda x2) sinh(lambda x1) / sinh(lambda), lambda = (k + 1/2) pi
  for (int k = 0; k < terms; ++k) {
    const double lam = (k + 0.5) * pi;
    if (lam > 700.0) break;
    d += s1 * 2.0 * (k % 2 == 0 ? 1.0 : -1.0) / std::sinh(lam);
  }
  // sides x2 = +-1 carry sin x1: sin(k pi x1) cosh(k pi x2) / cosh(k pi)
  for (int k = 1; k <= terms; ++k) {
    const double mu = k * pi;
    if (mu > 700.0) break;
    const double bk = -(k % 2 == 0 ? 1.0 : -1.0) * s1 * 2.0 * mu / (mu * mu - 1.0);
    d += bk * mu / std::cosh(mu);
  }
  return d;
}

}  // namespace dynreg
