#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dynreg {

/// Closed-form radial scalar function, stored in log-time t = log(1/r).
///
/// Profiles are sums of whitelisted terms:
///   c*r^a                    = c e^{-a t}
///   c/(log(e^b/r))^a         = c (b + t)^{-a}
///   pwlog(v0; t1:v1; ...)    piecewise constant in log r (value v_i on [t_i, t_{i+1}))
///   altlog(c, t0, q)         alternating blocks on [t0 q^j, t0 q^{j+1}) whose integrals are (-1)^j c
///
/// Everything is evaluated in t so radii below the double range never have
/// to be formed.
class RadialProfile {
 public:
  struct Power {
    double c = 0.0;
    double a = 0.0;
  };
  struct InvLog {
    double c = 0.0;
    double b = 1.0;
    double a = 1.0;
  };
  struct PiecewiseLog {
    std::vector<double> breaks;  // strictly increasing t
    std::vector<double> values;  // breaks.size() + 1 entries
  };
  struct AlternatingLog {
    double c = 0.0;
    double t0 = 1.0;
    double q = 2.0;
  };
  using Term = std::variant<Power, InvLog, PiecewiseLog, AlternatingLog>;

  RadialProfile() = default;

  static RadialProfile zero() { return {}; }
  static RadialProfile constant(double c) { return power(c, 0.0); }
  static RadialProfile power(double c, double a);
  static RadialProfile inv_log(double c, double b = 1.0, double a = 1.0);
  static RadialProfile piecewise(std::vector<double> breaks, std::vector<double> values);
  static RadialProfile alternating(double c, double t0, double q);

  /// Parses the whitelisted grammar above; throws DomainError naming the bad term.
  static RadialProfile parse(std::string_view text);

  RadialProfile operator+(const RadialProfile& other) const;
  RadialProfile operator*(double s) const;
  RadialProfile operator-() const { return *this * -1.0; }

  double at_t(double t) const;
  /// r <= 0 returns the limit at the origin.
  double at_r(double r) const;
  /// Value as t -> infinity (r -> 0).
  double limit_at_origin() const;

  /// Exact int_{t0}^{t1} of the profile in t; t1 may be +infinity.  Returns
  /// +-infinity for divergent tails and NaN when the tail oscillates.
  double integral_t(double t0, double t1) const;

  /// Discontinuities of the profile inside (t_lo, t_hi), sorted.
  std::vector<double> breakpoints(double t_lo, double t_hi) const;

  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Canonical text form; parse(describe()) reproduces the profile.
  std::string describe() const;

 private:
  explicit RadialProfile(Term t) { terms_.push_back(std::move(t)); }
  std::vector<Term> terms_;
};

}  // namespace dynreg
