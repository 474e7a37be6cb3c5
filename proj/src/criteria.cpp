#include "dynreg/criteria.hpp"

#include "dynreg/sphmean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dynreg {

namespace {

constexpr double kLn2 = std::numbers::ln2;

Mat scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return m;
}

struct ScalarVerdict {
  ConvergenceVerdict verdict = ConvergenceVerdict::Inconclusive;
  DivergenceRate rate = DivergenceRate::None;
};

// Rules on ordered partial values: `ext` are the geometric checkpoints,
// `dyadic` the equal-width ones (used only to tag the divergence rate).
ScalarVerdict scalar_verdict(const std::vector<double>& ext, const std::vector<double>& dyadic, double tol,
                             double& residual) {
  ScalarVerdict out;
  const std::size_t m = ext.size();
  residual = std::numeric_limits<double>::infinity();
  if (m < 3) return out;
  const double a = ext[m - 3], b = ext[m - 2], c = ext[m - 1];
  residual = std::max({std::abs(c - b), std::abs(c - a), std::abs(b - a)});
  if (residual <= tol * std::max(1.0, std::abs(c))) {
    out.verdict = ConvergenceVerdict::Converges;
    return out;
  }
  const std::size_t w = std::min<std::size_t>(8, m - 1);
  std::vector<double> inc;
  for (std::size_t i = m - w; i < m; ++i) inc.push_back(ext[i] - ext[i - 1]);
  const bool all_pos = std::all_of(inc.begin(), inc.end(), [](double d) { return d > 0.0; });
  const bool all_neg = std::all_of(inc.begin(), inc.end(), [](double d) { return d < 0.0; });
  if ((all_pos || all_neg) && w >= 3) {
    bool sustained = true;
    for (std::size_t i = 1; i < inc.size(); ++i) {
      if (std::abs(inc[i]) < 0.95 * std::abs(inc[i - 1])) sustained = false;
    }
    if (sustained) {
      out.verdict = ConvergenceVerdict::Diverges;
      if (all_neg) {
        out.rate = DivergenceRate::ToMinusInfinity;
      } else {
        out.rate = DivergenceRate::Log;
        const std::size_t d = dyadic.size();
        if (d >= 3) {
          const double i1 = dyadic[d - 1] - dyadic[d - 2];
          const double i0 = dyadic[d - 2] - dyadic[d - 3];
          if (i0 > 0.0 && i1 >= 1.5 * i0) out.rate = DivergenceRate::Power;
        }
      }
      return out;
    }
    return out;
  }
  if (!all_pos && !all_neg) {
    // Mixed signs: oscillation if the swing is not growing.
    auto range = [&](std::size_t lo, std::size_t hi) {
      const auto [mn, mx] = std::minmax_element(ext.begin() + static_cast<long>(lo), ext.begin() + static_cast<long>(hi));
      return *mx - *mn;
    };
    const double recent = range(m - w - 1, m);
    if (m >= 2 * w + 2) {
      const double earlier = range(m - 2 * w - 1, m - w);
      if (recent > 1.5 * earlier + tol) return out;
    }
    out.verdict = ConvergenceVerdict::Oscillates;
  }
  return out;
}

std::vector<double> entry_series(const std::vector<Mat>& v, Eigen::Index i, Eigen::Index j) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& m : v) out.push_back(m(i, j));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

std::string to_string(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::Converges: return "Converges";
    case ConvergenceVerdict::Diverges: return "Diverges";
    case ConvergenceVerdict::Oscillates: return "Oscillates";
    case ConvergenceVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(DivergenceRate r) {
  switch (r) {
    case DivergenceRate::None: return "None";
    case DivergenceRate::Log: return "Log";
    case DivergenceRate::Power: return "Power";
    case DivergenceRate::ToMinusInfinity: return "ToMinusInfinity";
  }
  return "None";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Inconclusive: return "Inconclusive";
    case Classification::LipschitzAtOrigin: return "LipschitzAtOrigin";
    case Classification::DifferentiableAtOrigin: return "DifferentiableAtOrigin";
    case Classification::DifferentiableWithZeroGradient: return "DifferentiableWithZeroGradient";
  }
  return "Inconclusive";
}

std::string to_string(Route r) {
  switch (r) {
    case Route::None: return "none";
    case Route::MuWindowBound: return "mu-window-bound";
    case Route::ConditionalRIntegral: return "conditional-R-integral";
    case Route::IteratedRIntegral: return "iterated-R-integral";
    case Route::AbsoluteIntegrability: return "A-minus-I-integrable";
    case Route::MuDivergence: return "mu-integral-to-minus-infinity";
    case Route::DynamicalSystem: return "dynamical-system";
  }
  return "none";
}

SphericalGrid Budget::grid(int n) const {
  return grid_resolution > 0 ? sphere_grid(n, grid_resolution) : default_sphere_grid(n);
}

Checkpoints checkpoints(double t_lo, int k_max, double t_ext) {
  if (k_max < 1 || k_max > 40) throw DomainError("k_max must be in [1, 40]");
  Checkpoints c;
  const int k_min = static_cast<int>(std::ceil(t_lo / kLn2 - 1e-12));
  if (std::abs(k_min * kLn2 - t_lo) > 1e-14 * std::max(1.0, t_lo)) {
    c.edges.push_back(t_lo);
    c.k.push_back(-1);
  }
  for (int k = std::max(k_min, 0); k <= k_max; ++k) {
    if (k * kLn2 < t_lo - 1e-14) continue;
    c.edges.push_back(c.edges.empty() ? t_lo : k * kLn2);
    c.k.push_back(k);
  }
  double T = std::max(k_max * kLn2, c.edges.back());
  if (c.edges.back() < T) {
    c.edges.push_back(T);
    c.k.push_back(-1);
  }
  c.first_geometric = c.edges.size() - 1;
  // whole doublings only: the divergence test compares equal log-ratio pieces
  while (2.0 * T <= t_ext) {
    T *= 2.0;
    c.edges.push_back(T);
    c.k.push_back(-1);
  }
  return c;
}

void classify_partials(IntegralEvidence& ev, double tol) {
  if (ev.ext_values.empty()) {
    ev.verdict = ConvergenceVerdict::Inconclusive;
    ev.diagnostic = "no checkpoints";
    return;
  }
  const Mat& last = ev.ext_values.back();
  bool any_div = false, any_osc = false, all_conv = true;
  DivergenceRate rate = DivergenceRate::None;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < last.rows(); ++i) {
    for (Eigen::Index j = 0; j < last.cols(); ++j) {
      double res = 0.0;
      const ScalarVerdict v = scalar_verdict(entry_series(ev.ext_values, i, j), entry_series(ev.partial_values, i, j), tol, res);
      if (v.verdict == ConvergenceVerdict::Converges) {
        worst = std::max(worst, res);
        continue;
      }
      all_conv = false;
      if (v.verdict == ConvergenceVerdict::Diverges) {
        any_div = true;
        if (rate == DivergenceRate::None || v.rate == DivergenceRate::Power) rate = v.rate;
      } else if (v.verdict == ConvergenceVerdict::Oscillates) {
        any_osc = true;
      }
    }
  }
  ev.limit = last;
  ev.residual = worst;
  ev.rate = DivergenceRate::None;
  if (all_conv) {
    ev.verdict = ConvergenceVerdict::Converges;
  } else if (any_div) {
    ev.verdict = ConvergenceVerdict::Diverges;
    ev.rate = rate;
  } else if (any_osc) {
    ev.verdict = ConvergenceVerdict::Oscillates;
  } else {
    ev.verdict = ConvergenceVerdict::Inconclusive;
    if (ev.diagnostic.empty()) ev.diagnostic = "partial values neither Cauchy nor monotonically divergent";
  }
}

IntegralEvidence evidence_from_samples(const std::string& name, const PiecewiseSamples& s, const Checkpoints& marks,
                                       double tol) {
  IntegralEvidence ev;
  ev.name = name;
  const auto cum = s.cumulative_at_edges();
  const auto& edges = s.edges();
  std::size_t e = 0;
  for (std::size_t i = 0; i < marks.edges.size(); ++i) {
    while (e < edges.size() && edges[e] < marks.edges[i]) ++e;
    if (e == edges.size() || edges[e] != marks.edges[i]) throw NumericalError("checkpoint missing from partition");
    if (marks.k[i] >= 0) {
      ev.k.push_back(marks.k[i]);
      ev.partial_values.push_back(cum[e]);
    }
    if (i >= marks.first_geometric) {
      ev.ext_t.push_back(marks.edges[i]);
      ev.ext_values.push_back(cum[e]);
    }
  }
  classify_partials(ev, tol);
  return ev;
}

namespace {

std::vector<double> merged_edges(const Checkpoints& marks, const std::vector<double>& breakpoints) {
  std::vector<double> edges = marks.edges;
  const double lo = edges.front(), hi = edges.back();
  for (double b : breakpoints) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

IntegralEvidence integral_evidence(const std::string& name, const std::function<Mat(double)>& f, double t_lo,
                                   const Budget& budget, const std::vector<double>& breakpoints) {
  const Checkpoints marks = checkpoints(t_lo, budget.k_max, budget.t_ext);
  const auto samples = PiecewiseSamples::adaptive(f, merged_edges(marks, breakpoints), 0.1 * budget.tol);
  return evidence_from_samples(name, samples, marks, budget.tol);
}

IntegralEvidence dini_integral(const Modulus& omega, double eps, double tol, const Budget& budget) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("dini_integral: eps in (0, 1] required");
  Budget b = budget;
  b.tol = tol;
  const double t_lo = -std::log(eps);
  return integral_evidence("dini", [&omega](double t) { return scalar(omega.omega_t(t)); }, t_lo, b,
                           omega.breakpoints(t_lo, b.t_ext));
}

IntegralEvidence square_dini_integral(const Modulus& omega, double tol, const Budget& budget) {
  Budget b = budget;
  b.tol = tol;
  return integral_evidence(
      "square_dini",
      [&omega](double t) {
        const double w = omega.omega_t(t);
        return scalar(w * w);
      },
      0.0, b, omega.breakpoints(0.0, b.t_ext));
}

double mu_window_integral(const CoefficientField& field, double r1, double r2, const SphericalGrid& grid, double tol) {
  if (!(r1 > 0.0 && r1 < r2 && r2 < 1.0)) throw DomainError("mu_window_integral: 0 < r1 < r2 < 1 required");
  const double a = -std::log(r2);
  const double b = -std::log(r1);
  std::vector<double> edges{a};
  for (double bp : field.modulus().breakpoints(a, b)) edges.push_back(bp);
  edges.push_back(b);
  const auto s = PiecewiseSamples::adaptive(
      [&](double t) { return scalar(mu_max(symmetrized_S(mean_matrix_R_t(field, t, grid)))); }, edges, 0.1 * tol);
  return s.cumulative_at_edges().back()(0, 0);
}

RadialCache::RadialCache(const CoefficientField& field, const Budget& budget) : n_(field.dim()) {
  if (!(budget.eps > 0.0 && budget.eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  t_lo_ = -std::log(budget.eps);
  marks_ = checkpoints(t_lo_, budget.k_max, budget.t_ext);
  const SphericalGrid grid = budget.grid(n_);
  R_ = PiecewiseSamples::adaptive([&](double t) { return mean_matrix_R_t(field, t, grid); },
                                  merged_edges(marks_, field.modulus().breakpoints(t_lo_, budget.t_ext)),
                                  0.1 * budget.tol);
  mu_ = R_.mapped([](double, const Mat& r) { return scalar(mu_max(symmetrized_S(r))); });
}

IntegralEvidence check_window_condition(const RadialCache& cache, const Budget& budget) {
  // sup_{s<t<=T} int_s^t mu = max_t (M(t) - min_{s<=t} M(s)), sampled at nodes and edges.
  const auto& mu = cache.mu();
  const auto prefix = mu.prefix_at_nodes();
  const auto cum = mu.cumulative_at_edges();
  struct Sample {
    double t, M;
  };
  std::vector<Sample> pts;
  for (std::size_t i = 0; i < mu.nodes().size(); ++i) pts.push_back({mu.nodes()[i], prefix[i](0, 0)});
  for (std::size_t e = 0; e < mu.edges().size(); ++e) pts.push_back({mu.edges()[e], cum[e](0, 0)});
  std::sort(pts.begin(), pts.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });

  IntegralEvidence ev;
  ev.name = "window_condition";
  const auto& marks = cache.marks();
  double min_M = 0.0, K = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < marks.edges.size(); ++i) {
    while (p < pts.size() && pts[p].t <= marks.edges[i]) {
      min_M = std::min(min_M, pts[p].M);
      K = std::max(K, pts[p].M - min_M);
      ++p;
    }
    if (marks.k[i] >= 0) {
      ev.k.push_back(marks.k[i]);
      ev.partial_values.push_back(scalar(K));
    }
    if (i >= marks.first_geometric) {
      ev.ext_t.push_back(marks.edges[i]);
      ev.ext_values.push_back(scalar(K));
    }
  }
  classify_partials(ev, budget.tol);
  if (ev.converges() && ev.value() > budget.K_max) {
    ev.verdict = ConvergenceVerdict::Inconclusive;
    ev.diagnostic = "window sup " + fmt(ev.value()) + " exceeds K_max";
  }
  return ev;
}

IntegralEvidence pv_integral_R(const RadialCache& cache, const Budget& budget) {
  return evidence_from_samples("pv_R", cache.R(), cache.marks(), budget.tol);
}

namespace {

// Product integrand |R(t) X(t)|_2 and R(t) X(t) where X(t) = int_t^inf `inner`.
std::pair<PiecewiseSamples, PiecewiseSamples> product_with_suffix(const PiecewiseSamples& R, const PiecewiseSamples& inner) {
  const auto X = inner.suffix_at_nodes();
  std::vector<Mat> norms, prods;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Mat p = R.values()[i] * X[i];
    prods.push_back(p);
    norms.push_back(scalar(spectral_norm(p)));
  }
  return {R.with_values(std::move(norms)), R.with_values(std::move(prods))};
}

IntegralEvidence inconclusive(const std::string& name, const std::string& why) {
  IntegralEvidence ev;
  ev.name = name;
  ev.verdict = ConvergenceVerdict::Inconclusive;
  ev.diagnostic = why;
  return ev;
}

}  // namespace

IntegralEvidence l1_norm_condition(const RadialCache& cache, const Budget& budget) {
  const auto pv = pv_integral_R(cache, budget);
  if (!pv.converges()) return inconclusive("l1_norm_R", "inner integral of R is " + to_string(pv.verdict));
  const auto [norms, prods] = product_with_suffix(cache.R(), cache.R());
  return evidence_from_samples("l1_norm_R", norms, cache.marks(), budget.tol);
}

IteratedReport iterated_condition(const RadialCache& cache, const Budget& budget) {
  IteratedReport rep;
  rep.level1_a = pv_integral_R(cache, budget);
  rep.level1_b = l1_norm_condition(cache, budget);
  if (!rep.level1_a.converges()) {
    rep.level2_a = inconclusive("iterated_level2_inner", "level-1 inner integral is " + to_string(rep.level1_a.verdict));
    rep.level2_b = inconclusive("iterated_level2_outer", "level-1 inner integral is " + to_string(rep.level1_a.verdict));
    return rep;
  }
  const auto [norms1, prods1] = product_with_suffix(cache.R(), cache.R());
  rep.level2_a = evidence_from_samples("iterated_level2_inner", prods1, cache.marks(), budget.tol);
  rep.level2_a.name = "iterated_level2_inner";
  if (!rep.level2_a.converges()) {
    rep.level2_b = inconclusive("iterated_level2_outer", "level-2 inner integral is " + to_string(rep.level2_a.verdict));
    return rep;
  }
  const auto [norms2, prods2] = product_with_suffix(cache.R(), prods1);
  rep.level2_b = evidence_from_samples("iterated_level2_outer", norms2, cache.marks(), budget.tol);
  return rep;
}

IntegralEvidence divergence_condition(const RadialCache& cache, const Budget& budget) {
  return evidence_from_samples("mu_divergence", cache.mu(), cache.marks(), budget.tol);
}

double sphere_area(int n) {
  if (n == 2) return 2.0 * std::numbers::pi;
  if (n == 3) return 4.0 * std::numbers::pi;
  throw DomainError("sphere_area: n in {2, 3}");
}

IntegralEvidence volume_integral_form(const CoefficientField& field, double r, const Budget& budget) {
  const int n = field.dim();
  if (n != 2 && n != 3) throw DomainError("volume_integral_form: n in {2, 3}");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("volume_integral_form: 0 < r < 1 required");
  const SphericalGrid grid = budget.grid(n);
  const double area = sphere_area(n);
  const double t_lo = -std::log(r);
  // Cartesian evaluation stays above the double underflow range.
  const double t_cap = 650.0;
  Checkpoints marks = checkpoints(t_lo, budget.k_max, std::min(budget.t_ext, t_cap));
  const auto& rule = gauss_legendre(PiecewiseSamples::kPoints);
  auto shell = [&](double rho_lo, double rho_hi) -> Mat {
    Mat acc = Mat::Zero(n, n);
    const double half = 0.5 * (rho_hi - rho_lo);
    const double mid = 0.5 * (rho_hi + rho_lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double rho = mid + half * rule.nodes[q];
      // rho^(n-1) drho dS / rho^n
      const double wr = half * rule.weights[q] / rho;
      for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        const Vec x = rho * grid.nodes[k];
        const Mat a = field.eval(x);
        const Vec xh = x / x.stableNorm();
        acc += (wr * area * grid.weights[k]) * (a - n * (a * xh) * xh.transpose());
      }
    }
    return acc;
  };
  const auto bps = field.modulus().breakpoints(t_lo, t_cap);
  IntegralEvidence ev;
  ev.name = "volume_form";
  Mat acc = Mat::Zero(n, n);
  double prev = marks.edges.front();
  for (std::size_t i = 0; i < marks.edges.size(); ++i) {
    const double e = marks.edges[i];
    if (e > prev) {
      // dyadic sub-shells in rho, split at profile breakpoints
      std::vector<double> cuts{prev};
      for (double s = prev + kLn2; s < e - 1e-12; s += kLn2) cuts.push_back(s);
      for (double b : bps) {
        if (b > prev && b < e) cuts.push_back(b);
      }
      cuts.push_back(e);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) acc += shell(std::exp(-cuts[c + 1]), std::exp(-cuts[c]));
      prev = e;
    }
    if (marks.k[i] >= 0) {
      ev.k.push_back(marks.k[i]);
      ev.partial_values.push_back(acc);
    }
    if (i >= marks.first_geometric) {
      ev.ext_t.push_back(e);
      ev.ext_values.push_back(acc);
    }
  }
  classify_partials(ev, budget.tol);
  return ev;
}

IntegralEvidence condition_A_minus_I(const CoefficientField& field, const Budget& budget) {
  const int n = field.dim();
  const SphericalGrid grid = budget.grid(n);
  const double t_lo = -std::log(budget.eps);
  auto f = [&](double t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
      acc += grid.weights[k] * max_abs_entry(field.deviation_polar(t, grid.nodes[k]));
    }
    return scalar(acc);
  };
  auto ev = integral_evidence("A_minus_I", f, t_lo, budget, field.modulus().breakpoints(t_lo, budget.t_ext));
  return ev;
}

LinearGenerator spherical_mean_generator(const CoefficientField& field, const SphericalGrid& grid, double t_lo,
                                         double t_hi) {
  LinearGenerator gen;
  gen.dim = field.dim();
  gen.R = [&field, grid](double t) -> MatrixXd { return mean_matrix_R_t(field, t, grid); };
  gen.breakpoints = field.modulus().breakpoints(t_lo, t_hi);
  gen.description = field.description();
  return gen;
}

DynamicsEvidence dynamics_evidence(const CoefficientField& field, const Budget& budget) {
  const int n = field.dim();
  const LinearGenerator gen = spherical_mean_generator(field, budget.grid(n), budget.t0, budget.t_horizon);

  DynamicsEvidence out;
  out.t0 = budget.t0;
  out.t1 = budget.t_horizon;
  const auto t_grid = stability_grid(budget.t0, budget.t_horizon);
  // Matrix trajectory: both the stability track and the asymptotic limit.
  auto rhs = [&gen, n](double t, const VectorXd& y) -> VectorXd {
    const Eigen::Map<const MatrixXd> phi(y.data(), n, n);
    MatrixXd d = -(gen.R(t) * phi);
    return Eigen::Map<const VectorXd>(d.data(), n * n);
  };
  IntegrateOptions opts;
  opts.tol = budget.dyn_tol;
  opts.output_times = t_grid;
  MatrixXd id = MatrixXd::Identity(n, n);
  const Trajectory traj =
      integrate_rhs(rhs, gen.breakpoints, budget.t0, budget.t_horizon, Eigen::Map<const VectorXd>(id.data(), n * n), opts);
  FundamentalMatrixTrack track;
  track.tol = budget.dyn_tol;
  track.t_grid = t_grid;
  for (double t : t_grid) {
    const VectorXd v = traj.at(t);
    track.Phi.push_back(Eigen::Map<const MatrixXd>(v.data(), n, n));
    track.step_error.push_back(0.0);
  }
  track.Phi.front() = id;
  out.stability = stability_constant(track);
  out.stability.asymptotic = asymptotic_limit(traj, budget.window_fraction, budget.asym_tol);
  if (2.0 * budget.t0 < budget.t_horizon) {
    const auto grid2 = stability_grid(2.0 * budget.t0, budget.t_horizon, 8, 16);
    out.K_hat_at_2t0 = stability_constant(fundamental_matrix(gen, grid2, budget.dyn_tol)).K_hat;
  }
  return out;
}

RegularityVerdict classify(const CoefficientField& field, const Budget& budget, bool with_dynamics) {
  if (!field.normalized()) throw DomainError("classify: field is not normalized (A(0) != I)");
  RegularityVerdict v;
  v.modulus_diagnostics = check_modulus(field.modulus());

  // Square-Dini on omega, or on max(omega, r^(1-kappa)) when the monotonicity condition fails.
  IntegralEvidence sq;
  if (v.modulus_diagnostics.kappa_monotone) {
    sq = square_dini_integral(field.modulus(), budget.tol, budget);
  } else {
    const Modulus& m = field.modulus();
    const double kappa = m.kappa;
    sq = integral_evidence(
        "square_dini",
        [&m, kappa](double t) {
          const double w = std::max(m.omega_t(t), std::exp(-(1.0 - kappa) * t));
          return scalar(w * w);
        },
        0.0, budget, m.breakpoints(0.0, budget.t_ext));
    v.notes.push_back("modulus fails the kappa monotonicity condition; square-Dini evaluated on max(omega, r^(1-kappa))");
  }
  v.evidence["square_dini"] = sq;

  const RadialCache cache(field, budget);
  const auto c11 = check_window_condition(cache, budget);
  const auto iter = iterated_condition(cache, budget);
  const auto mu_ev = divergence_condition(cache, budget);
  const auto ami = condition_A_minus_I(field, budget);
  v.evidence["window_condition"] = c11;
  v.evidence["pv_integral_R"] = iter.level1_a;
  v.evidence["l1_norm_R"] = iter.level1_b;
  v.evidence["iterated_level2_inner"] = iter.level2_a;
  v.evidence["iterated_level2_outer"] = iter.level2_b;
  v.evidence["mu_divergence"] = mu_ev;
  v.evidence["A_minus_I"] = ami;

  const bool sq_ok = sq.converges();
  const bool bounded11 = c11.converges();
  Classification analytic = Classification::Inconclusive;
  Route route = Route::None;
  if (sq_ok) {
    if (bounded11 && mu_ev.verdict == ConvergenceVerdict::Diverges && mu_ev.rate == DivergenceRate::ToMinusInfinity) {
      analytic = Classification::DifferentiableWithZeroGradient;
      route = Route::MuDivergence;
    } else if (iter.level1_a.converges() && iter.level1_b.converges()) {
      analytic = Classification::DifferentiableAtOrigin;
      route = Route::ConditionalRIntegral;
    } else if (iter.level1_a.converges() && iter.level1_b.verdict == ConvergenceVerdict::Inconclusive &&
               iter.level2_a.converges() && iter.level2_b.converges()) {
      analytic = Classification::DifferentiableAtOrigin;
      route = Route::IteratedRIntegral;
    } else if (ami.converges()) {
      analytic = Classification::DifferentiableAtOrigin;
      route = Route::AbsoluteIntegrability;
    } else if (bounded11) {
      analytic = Classification::LipschitzAtOrigin;
      route = Route::MuWindowBound;
    }
  } else {
    v.notes.push_back("square-Dini condition not established (" + to_string(sq.verdict) + "); no route applies");
  }
  v.analytic_classification = analytic;

  Classification dyn = Classification::Inconclusive;
  if (with_dynamics) {
    v.dynamics = dynamics_evidence(field, budget);
    const auto& st = v.dynamics->stability;
    if (st.verdict_uniform_stability == StabilityVerdict::EvidenceStable) {
      dyn = Classification::LipschitzAtOrigin;
      if (st.asymptotic && st.asymptotic->verdict == AsymptoticVerdict::EvidenceYes) dyn = Classification::DifferentiableAtOrigin;
    }
  }
  v.dynamics_classification = sq_ok ? dyn : Classification::Inconclusive;

  v.classification = analytic;
  v.route = route;
  if (static_cast<int>(v.dynamics_classification) > static_cast<int>(analytic)) {
    v.classification = v.dynamics_classification;
    v.route = Route::DynamicalSystem;
  }
  if (with_dynamics && analytic != Classification::Inconclusive &&
      v.dynamics->stability.verdict_uniform_stability == StabilityVerdict::EvidenceUnstable) {
    v.notes.push_back("analytic route and dynamical-system evidence disagree; both reported");
  }
  return v;
}

}  // namespace dynreg
