#include "dynreg/coeff.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynreg {

std::string to_string(Family f) {
  switch (f) {
    case Family::Constant: return "Constant";
    case Family::Radial: return "Radial";
    case Family::GilbargSerrin: return "GilbargSerrin";
    case Family::PerturbedRadial: return "PerturbedRadial";
    case Family::Custom: return "Custom";
  }
  return "Custom";
}

Modulus Modulus::from_profile(const RadialProfile& p, double kappa) {
  Modulus m;
  if (!p.is_zero()) m.parts.push_back(p);
  m.kappa = kappa;
  m.analytic_tag = p.describe();
  return m;
}

Modulus Modulus::parse(const std::string& text, double kappa) {
  Modulus m = from_profile(RadialProfile::parse(text), kappa);
  m.analytic_tag = text;
  return m;
}

double Modulus::omega_t(double t) const {
  double acc = 0.0;
  for (const auto& p : parts) acc += std::abs(p.at_t(t));
  return acc;
}

double Modulus::omega(double r) const {
  if (r <= 0.0) return omega_t(std::numeric_limits<double>::infinity());
  return omega_t(-std::log(r));
}

bool Modulus::is_zero() const {
  return std::all_of(parts.begin(), parts.end(), [](const RadialProfile& p) { return p.is_zero(); });
}

std::vector<double> Modulus::breakpoints(double t_lo, double t_hi) const {
  std::vector<double> out;
  for (const auto& p : parts) {
    auto b = p.breakpoints(t_lo, t_hi);
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Modulus::describe() const {
  if (!analytic_tag.empty()) return analytic_tag;
  if (parts.empty()) return "0";
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "|" : " + |") + p.describe() + "|";
  return s;
}

ModulusDiagnostics check_modulus(const Modulus& m, double t_max, int samples) {
  ModulusDiagnostics d;
  double prev_w = std::numeric_limits<double>::infinity();
  double prev_k = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double t = t_max * i / samples;
    const double w = m.omega_t(t);
    // increasing t is decreasing r
    if (w > prev_w * (1.0 + 1e-12) + 1e-300) d.nondecreasing = false;
    const double k = std::log(std::max(w, 1e-300)) + t * (1.0 - m.kappa);
    if (w > 0.0 && k < prev_k - 1e-12) {
      d.kappa_monotone = false;
      d.worst_kappa_violation = std::max(d.worst_kappa_violation, prev_k - k);
    }
    if (w > 0.0) prev_k = std::max(prev_k, k);
    prev_w = w;
  }
  const double tail = m.omega_t(std::numeric_limits<double>::infinity());
  d.vanishes_at_origin = tail <= 1e-12 && m.omega_t(t_max) <= 0.5;
  if (!d.nondecreasing) d.note += "omega is not nondecreasing on the sample grid; ";
  if (!d.vanishes_at_origin) d.note += "omega does not vanish at the origin; ";
  if (!d.kappa_monotone) d.note += "omega(r) r^(kappa-1) is not nonincreasing for kappa = " + std::to_string(m.kappa) + "; ";
  return d;
}

struct FieldBuilder {
  // `deviation` evaluates A - I.
  static CoefficientField build(int n, Family family, PolarEvaluator deviation, Mat origin, Modulus modulus,
                                bool normalized, std::string description) {
    CoefficientField f;
    f.dim_ = n;
    f.family_ = family;
    f.deviation_ = std::move(deviation);
    f.origin_value_ = std::move(origin);
    f.modulus_ = std::move(modulus);
    f.normalized_ = normalized;
    f.description_ = std::move(description);
    f.ellipticity_ = sample_ellipticity(f);
    return f;
  }

  // Sampled (lambda_min, lambda_max); rejects non-symmetric or non-elliptic samples.
  static std::pair<double, double> sample_ellipticity(const CoefficientField& f) {
    const SphericalGrid grid = sphere_grid(f.dim_, f.dim_ == 2 ? 32 : 8);
    std::vector<double> ts;
    for (int i = 0; i <= 120; ++i) ts.push_back(0.05 * i);
    for (double t = 7.0; t < 1e7; t *= 1.25) ts.push_back(t);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto account = [&](const Mat& a, double t) {
      if (max_abs_entry(a - a.transpose()) > 1e-14 * std::max(1.0, max_abs_entry(a))) {
        throw DomainError("coefficient matrix is not symmetric at r = exp(-" + std::to_string(t) + ")");
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
      const double emin = es.eigenvalues().minCoeff();
      if (!(emin > 0.0)) {
        std::ostringstream os;
        os << "ellipticity violated: eigenvalue " << emin << " at r = exp(-" << t << ")";
        throw DomainError(os.str());
      }
      lo = std::min(lo, emin);
      hi = std::max(hi, es.eigenvalues().maxCoeff());
    };
    for (double t : ts) {
      for (const auto& th : grid.nodes) account(f.eval_polar(t, th), t);
    }
    account(f.origin_value_, std::numeric_limits<double>::infinity());
    return {lo, hi};
  }
};

Mat CoefficientField::eval(const Vec& x) const {
  const double r = x.stableNorm();
  if (r == 0.0) return origin_value_;
  return eval_polar(-std::log(r), x / r);
}

CoefficientField make_constant(int n, const Mat& A0) {
  if (n < 2 || A0.rows() != n || A0.cols() != n) throw DomainError("make_constant: A0 must be n x n with n >= 2");
  if (max_abs_entry(A0 - A0.transpose()) > 1e-14 * std::max(1.0, max_abs_entry(A0))) {
    throw DomainError("make_constant: A0 is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(A0, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream os;
    os << "make_constant: A0 is not positive definite, eigenvalue " << es.eigenvalues().minCoeff();
    throw DomainError(os.str());
  }
  const bool identity = (A0 - Mat::Identity(n, n)).isZero(0.0);
  const double offset = max_abs_entry(A0 - Mat::Identity(n, n));
  Modulus m = identity ? Modulus::zero() : Modulus::from_profile(RadialProfile::constant(offset));
  const Mat D0 = A0 - Mat::Identity(n, n);
  auto polar = [D0](double, const Vec&) { return D0; };
  std::ostringstream os;
  os << "constant A0 (n=" << n << ")";
  return FieldBuilder::build(n, Family::Constant, polar, A0, m, identity, os.str());
}

CoefficientField make_gilbarg_serrin(int n, const RadialProfile& g, std::optional<Modulus> omega_bound) {
  if (n < 2) throw DomainError("make_gilbarg_serrin: n >= 2 required");
  if (g.limit_at_origin() != 0.0) throw DomainError("make_gilbarg_serrin: g(0) must be 0, got " + std::to_string(g.limit_at_origin()));
  Modulus m = omega_bound ? *omega_bound : Modulus::from_profile(g);
  // |g| <= omega on a verification grid, and 1 + g > 0.
  std::vector<double> ts;
  for (int i = 0; i <= 400; ++i) ts.push_back(0.05 * i);
  for (double t = 20.5; t < 1e9; t *= 1.1) ts.push_back(t);
  for (double b : g.breakpoints(0.0, 1e9)) {
    ts.push_back(b);
    ts.push_back(std::nextafter(b, 0.0));
  }
  for (double t : ts) {
    const double gv = g.at_t(t);
    if (std::abs(gv) > m.omega_t(t) * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream os;
      os << "make_gilbarg_serrin: |g| = " << std::abs(gv) << " exceeds omega = " << m.omega_t(t) << " at r = exp(-" << t
         << ")";
      throw DomainError(os.str());
    }
    if (!(1.0 + gv > 0.0)) {
      std::ostringstream os;
      os << "make_gilbarg_serrin: ellipticity violated, 1 + g = " << 1.0 + gv << " at r = exp(-" << t << ")";
      throw DomainError(os.str());
    }
  }
  auto polar = [g](double t, const Vec& th) -> Mat { return g.at_t(t) * th * th.transpose(); };
  CoefficientField f = FieldBuilder::build(n, Family::GilbargSerrin, polar, Mat::Identity(n, n), m, true,
                                           "Gilbarg-Serrin g = " + g.describe());
  f.gs_profile_ = g;
  return f;
}

CoefficientField make_radial(int n, const RadialMatrix& a0) {
  if (a0.shape.rows() != n || a0.shape.cols() != n) throw DomainError("make_radial: shape must be n x n");
  if (a0.profile.limit_at_origin() != 0.0) throw DomainError("make_radial: a0(0) must be I");
  Modulus m = Modulus::from_profile(a0.profile * max_abs_entry(a0.shape));
  auto polar = [a0](double t, const Vec&) -> Mat { return a0.profile.at_t(t) * a0.shape; };
  return FieldBuilder::build(n, Family::Radial, polar, Mat::Identity(n, n), m, true,
                             "radial I + (" + a0.profile.describe() + ") shape");
}

CoefficientField make_perturbed_radial(int n, const RadialMatrix& a0, const Perturbation& a1) {
  if (a0.shape.rows() != n || a0.shape.cols() != n) throw DomainError("make_perturbed_radial: shape must be n x n");
  if (a0.profile.limit_at_origin() != 0.0) throw DomainError("make_perturbed_radial: a0(0) must be I");
  Modulus m;
  if (!a0.profile.is_zero()) m.parts.push_back(a0.profile * max_abs_entry(a0.shape));
  if (!a1.envelope.is_zero()) m.parts.push_back(a1.envelope);
  auto polar = [a0, a1](double t, const Vec& th) -> Mat {
    Mat a = a0.profile.at_t(t) * a0.shape;
    a += a1.eval(t, th) - a1.at_origin;
    return a;
  };
  return FieldBuilder::build(n, Family::PerturbedRadial, polar, Mat::Identity(n, n), m, true,
                             "perturbed radial I + (" + a0.profile.describe() + ") shape + " + a1.description);
}

CoefficientField make_custom(int n, PolarEvaluator polar, Modulus modulus, std::string description) {
  auto deviation = [polar = std::move(polar)](double t, const Vec& th) -> Mat {
    return polar(t, th) - Mat::Identity(th.size(), th.size());
  };
  return FieldBuilder::build(n, Family::Custom, deviation, Mat::Identity(n, n), std::move(modulus), true,
                             std::move(description));
}

Perturbation gs_perturbation(int n, const RadialProfile& g) {
  Perturbation p;
  p.eval = [g](double t, const Vec& th) -> Mat { return g.at_t(t) * th * th.transpose(); };
  p.at_origin = Mat::Zero(n, n);
  p.envelope = g;
  p.description = "(" + g.describe() + ") theta theta^T";
  return p;
}

Perturbation e11_perturbation(int n, const RadialProfile& g, double eps) {
  Perturbation p;
  p.eval = [g, eps](double t, const Vec& th) -> Mat {
    Mat a = Mat::Zero(th.size(), th.size());
    a(0, 0) = eps * g.at_t(t) * th(0) * th(0);
    return a;
  };
  p.at_origin = Mat::Zero(n, n);
  p.envelope = g * std::abs(eps);
  std::ostringstream os;
  os << eps << " (" << g.describe() << ") theta_1^2 E_11";
  p.description = os.str();
  return p;
}

double modulus_estimate_t(const CoefficientField& field, double t, const SphericalGrid& grid) {
  double worst = 0.0;
  for (const auto& th : grid.nodes) worst = std::max(worst, max_abs_entry(field.deviation_polar(t, th)));
  return worst;
}

double modulus_estimate(const CoefficientField& field, double r, const SphericalGrid& grid) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("modulus_estimate: 0 < r < 1 required");
  return modulus_estimate_t(field, -std::log(r), grid);
}

}  // namespace dynreg
