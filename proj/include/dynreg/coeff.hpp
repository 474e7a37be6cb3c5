#pragma once

#include "dynreg/profile.hpp"
#include "dynreg/quadrature.hpp"
#include "dynreg/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dynreg {

enum class Family { Constant, Radial, GilbargSerrin, PerturbedRadial, Custom };

std::string to_string(Family f);

/// Upper envelope omega(r) = sum_i |part_i(r)| of the coefficient oscillation.
struct Modulus {
  std::vector<RadialProfile> parts;
  double kappa = 0.5;
  std::string analytic_tag;

  static Modulus zero() { return {}; }
  static Modulus from_profile(const RadialProfile& p, double kappa = 0.5);
  /// Parses the profile whitelist; the tag is the input text.
  static Modulus parse(const std::string& text, double kappa = 0.5);

  double omega_t(double t) const;
  double omega(double r) const;
  bool is_zero() const;
  std::vector<double> breakpoints(double t_lo, double t_hi) const;
  std::string describe() const;
};

struct ModulusDiagnostics {
  bool nondecreasing = true;        // omega nondecreasing in r
  bool vanishes_at_origin = true;   // tail sample below tolerance
  bool kappa_monotone = true;       // omega(r) r^(kappa - 1) nonincreasing in r
  double worst_kappa_violation = 0.0;
  std::string note;
};

/// Samples the monotonicity conditions on a log-spaced grid r = e^-t, t in [0, t_max].
ModulusDiagnostics check_modulus(const Modulus& m, double t_max = 200.0, int samples = 2000);

/// A(x) as an evaluator in polar log-time coordinates: A at x = e^-t theta.
using PolarEvaluator = std::function<Mat(double t, const Vec& theta)>;

class CoefficientField {
 public:
  int dim() const { return dim_; }
  Family family() const { return family_; }
  const Modulus& modulus() const { return modulus_; }
  std::pair<double, double> ellipticity() const { return ellipticity_; }
  /// False for constant fields with A0 != I; such fields are for sphmean only.
  bool normalized() const { return normalized_; }
  const std::string& description() const { return description_; }

  /// Cartesian evaluation; eval(0) = I for normalized fields.
  Mat eval(const Vec& x) const;
  /// Evaluation at |x| = e^-t, x/|x| = theta, never forming the radius.
  Mat eval_polar(double t, const Vec& theta) const { return Mat::Identity(dim_, dim_) + deviation_(t, theta); }
  /// A - I at the same point, formed without cancellation against I.
  Mat deviation_polar(double t, const Vec& theta) const { return deviation_(t, theta); }

  /// For Gilbarg-Serrin fields: the scalar g.
  const std::optional<RadialProfile>& gs_profile() const { return gs_profile_; }

  friend CoefficientField make_constant(int n, const Mat& A0);
  friend CoefficientField make_gilbarg_serrin(int n, const RadialProfile& g, std::optional<Modulus> omega_bound);
  friend CoefficientField make_custom(int n, PolarEvaluator polar, Modulus modulus, std::string description);
  friend struct FieldBuilder;

 private:
  int dim_ = 2;
  Family family_ = Family::Custom;
  PolarEvaluator deviation_;
  Mat origin_value_;
  std::pair<double, double> ellipticity_{1.0, 1.0};
  Modulus modulus_;
  bool normalized_ = true;
  std::string description_;
  std::optional<RadialProfile> gs_profile_;
};

/// a0(r) = I + profile(r) * shape, shape symmetric.
struct RadialMatrix {
  RadialProfile profile;
  Mat shape;
};

/// Non-radial part a1(x) with its value at the origin and an entrywise envelope.
struct Perturbation {
  PolarEvaluator eval;
  Mat at_origin;
  RadialProfile envelope;
  std::string description;
};

CoefficientField make_constant(int n, const Mat& A0);
CoefficientField make_gilbarg_serrin(int n, const RadialProfile& g, std::optional<Modulus> omega_bound = std::nullopt);
CoefficientField make_radial(int n, const RadialMatrix& a0);
CoefficientField make_perturbed_radial(int n, const RadialMatrix& a0, const Perturbation& a1);
/// Free-form field; the modulus is trusted, ellipticity is sampled.
CoefficientField make_custom(int n, PolarEvaluator polar, Modulus modulus, std::string description);

/// a1 = g(r) theta theta^T.
Perturbation gs_perturbation(int n, const RadialProfile& g);
/// a1 = eps g(r) theta_1^2 E_11.
Perturbation e11_perturbation(int n, const RadialProfile& g, double eps = 1.0);

/// max over grid nodes of max_ij |A(r theta) - I|_ij.
double modulus_estimate(const CoefficientField& field, double r, const SphericalGrid& grid);
double modulus_estimate_t(const CoefficientField& field, double t, const SphericalGrid& grid);

}  // namespace dynreg
