#include "dynreg/dynsys.hpp"

#include "dynreg/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dynreg {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Fourth-order continuous extension (Hairer, Norsett, Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

std::string time_str(double t) {
  std::ostringstream os;
  os.precision(10);
  os << t;
  return os.str();
}

using Rhs = std::function<VectorXd(double, const VectorXd&)>;

void integrate_segment(const Rhs& f, double a, double b, bool jump_at_b, const std::vector<double>& outputs,
                       const IntegrateOptions& opts, double& h, Trajectory& traj) {
  // Stage times at b are evaluated from the left when b is a jump.
  const double b_eval = jump_at_b ? std::nextafter(b, -std::numeric_limits<double>::infinity()) : b;
  auto eval = [&](double t, const VectorXd& y) { return f(std::min(t, b_eval), y); };

  double t = a;
  VectorXd y = traj.y.back();
  VectorXd k1 = f(a, y);
  traj.dy.back() = k1;

  auto next_out = std::upper_bound(outputs.begin(), outputs.end(), a);
  while (t < b) {
    double target = b;
    if (next_out != outputs.end() && *next_out < b) target = *next_out;
    const double floor = opts.h_min_rel * std::max(1.0, std::abs(t));
    if (opts.h_max > 0.0) h = std::min(h, opts.h_max);
    bool clipped = false;
    double hs = h;
    if (t + hs >= target) {
      hs = target - t;
      clipped = true;
    }
    if (hs < floor && !clipped) {
      throw NumericalError("step size underflow at t = " + time_str(t) + " (generator too large or non-smooth)");
    }
    const VectorXd k2 = eval(t + c2 * hs, y + hs * (a21 * k1));
    const VectorXd k3 = eval(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const VectorXd k4 = eval(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorXd k5 = eval(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorXd k6 = eval(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorXd y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = clipped ? target : t + hs;
    const VectorXd k7 = eval(t_new, y_new);
    const VectorXd err_vec = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = err_vec.size() ? err_vec.cwiseAbs().maxCoeff() : 0.0;
    // Linear homogeneous systems are scale invariant: control the error relative to |y|.
    double scale = std::max({y.size() ? y.cwiseAbs().maxCoeff() : 0.0, y_new.size() ? y_new.cwiseAbs().maxCoeff() : 0.0,
                             opts.abs_floor});
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    const double allowed = opts.tol * hs * scale;
    if (!std::isfinite(err)) {
      if (hs < floor) throw NumericalError("non-finite solution at t = " + time_str(t));
      h = 0.25 * hs;
      ++traj.rejected_steps;
      continue;
    }
    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(allowed / err, 0.25), 0.2, 5.0);
    if (err <= allowed) {
      traj.dense.push_back(hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7));
      t = t_new;
      y = y_new;
      k1 = k7;
      traj.t.push_back(t);
      traj.y.push_back(y);
      traj.dy.push_back(k7);
      traj.step_error.push_back(err);
      if (clipped && next_out != outputs.end() && t >= *next_out) ++next_out;
      // A clipped step says nothing about the natural step size.
      h = clipped ? std::max(h, hs * factor) : hs * factor;
    } else {
      ++traj.rejected_steps;
      h = hs * factor;
      if (h < floor) throw NumericalError("step size underflow at t = " + time_str(t) + " (generator too large or non-smooth)");
    }
  }
}

double spectral_norm_impl(const MatrixXd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::vector<double> window_ends(double t0, double t1, int windows) {
  std::vector<double> ends;
  for (int k = 1; k <= windows; ++k) ends.push_back(t0 + (t1 - t0) * std::ldexp(1.0, k - windows));
  ends.back() = t1;
  return ends;
}

}  // namespace

double LinearGenerator::mu(double t) const {
  const MatrixXd r = R(t);
  const MatrixXd s = -0.5 * (r + r.transpose());
  if (s.rows() == 1) return s(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

LinearGenerator constant_generator(const MatrixXd& R, std::string description) {
  LinearGenerator g;
  g.dim = static_cast<int>(R.rows());
  g.R = [R](double) { return R; };
  g.description = std::move(description);
  return g;
}

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::EvidenceStable: return "EvidenceStable";
    case StabilityVerdict::EvidenceUnstable: return "EvidenceUnstable";
    case StabilityVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(AsymptoticVerdict v) {
  switch (v) {
    case AsymptoticVerdict::EvidenceYes: return "EvidenceYes";
    case AsymptoticVerdict::EvidenceNo: return "EvidenceNo";
    case AsymptoticVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

VectorXd Trajectory::at(double time) const {
  if (t.empty()) throw DomainError("empty trajectory");
  if (time < t.front() || time > t.back()) throw DomainError("trajectory evaluated outside [t0, t1] at t = " + time_str(time));
  auto it = std::upper_bound(t.begin(), t.end(), time);
  if (it == t.end()) return y.back();
  const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
  if (time == t[k]) return y[k];
  const double h = t[k + 1] - t[k];
  const double s = (time - t[k]) / h;
  if (k + 1 < dense.size() && dense[k + 1].size() == y[k].size()) {
    const VectorXd ydiff = y[k + 1] - y[k];
    const VectorXd c3 = h * dy[k] - ydiff;
    const VectorXd c4 = ydiff - h * dy[k + 1] - c3;
    const double s1 = 1.0 - s;
    return y[k] + s * (ydiff + s1 * (c3 + s * (c4 + s1 * dense[k + 1])));
  }
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1];
}

Trajectory integrate_rhs(const Rhs& f, const std::vector<double>& breakpoints, double t0, double t1, const VectorXd& y0,
                         const IntegrateOptions& opts) {
  if (!(t1 > t0)) throw DomainError("integrate: t0 < t1 required");
  if (!(opts.tol > 0.0)) throw DomainError("integrate: tol must be positive");
  Trajectory traj;
  traj.t.push_back(t0);
  traj.y.push_back(y0);
  traj.dy.push_back(VectorXd::Zero(y0.size()));
  traj.dense.emplace_back();
  traj.step_error.push_back(0.0);

  std::vector<double> cuts;
  for (double b : breakpoints) {
    if (b > t0 && b < t1) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(t1);

  std::vector<double> outputs = opts.output_times;
  std::sort(outputs.begin(), outputs.end());

  double h = opts.h_init > 0.0 ? opts.h_init : std::min(0.05, 0.01 * (t1 - t0));
  double a = t0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double b = cuts[i];
    const bool jump = i + 1 < cuts.size();
    if (i > 0) {
      // Restart: duplicate the sample so the right-sided derivative has its own slot.
      traj.t.push_back(a);
      traj.y.push_back(traj.y.back());
      traj.dy.push_back(traj.dy.back());
      traj.dense.emplace_back();
      traj.step_error.push_back(0.0);
      h = std::min(h, 0.05 * std::max(1.0, b - a));
    }
    integrate_segment(f, a, b, jump, outputs, opts, h, traj);
    a = b;
  }
  return traj;
}

Trajectory integrate_system(const LinearGenerator& gen, double t0, double t1, const VectorXd& phi0,
                            const IntegrateOptions& opts) {
  if (phi0.size() != gen.dim) throw DomainError("integrate_system: phi0 has the wrong dimension");
  Rhs f = [&gen](double t, const VectorXd& y) -> VectorXd { return -(gen.R(t) * y); };
  return integrate_rhs(f, gen.breakpoints, t0, t1, phi0, opts);
}

FundamentalMatrixTrack fundamental_matrix(const LinearGenerator& gen, const std::vector<double>& t_grid, double tol) {
  if (t_grid.size() < 2) throw DomainError("fundamental_matrix: grid needs at least two times");
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw DomainError("fundamental_matrix: grid must be increasing");
  }
  const int n = gen.dim;
  Rhs f = [&gen, n](double t, const VectorXd& y) -> VectorXd {
    const Eigen::Map<const MatrixXd> phi(y.data(), n, n);
    MatrixXd d = -(gen.R(t) * phi);
    return Eigen::Map<const VectorXd>(d.data(), n * n);
  };
  MatrixXd id = MatrixXd::Identity(n, n);
  IntegrateOptions opts;
  opts.tol = tol;
  opts.output_times = t_grid;
  const Trajectory traj =
      integrate_rhs(f, gen.breakpoints, t_grid.front(), t_grid.back(), Eigen::Map<const VectorXd>(id.data(), n * n), opts);

  FundamentalMatrixTrack track;
  track.tol = tol;
  track.t_grid = t_grid;
  std::size_t s = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    while (s < traj.t.size() && traj.t[s] <= t_grid[k]) acc += traj.step_error[s++];
    const VectorXd v = k == 0 ? Eigen::Map<const VectorXd>(id.data(), n * n) : traj.at(t_grid[k]);
    track.Phi.push_back(Eigen::Map<const MatrixXd>(v.data(), n, n));
    track.step_error.push_back(k == 0 ? 0.0 : acc);
    acc = 0.0;
  }
  return track;
}

std::vector<double> stability_grid(double t0, double t1, int windows, int per_window) {
  if (!(t1 > t0) || windows < 1 || per_window < 1) throw DomainError("stability_grid: bad arguments");
  std::vector<double> grid{t0};
  double a = t0;
  for (double e : window_ends(t0, t1, windows)) {
    for (int i = 1; i <= per_window; ++i) grid.push_back(a + (e - a) * i / per_window);
    grid.back() = e;
    a = e;
  }
  return grid;
}

double spectral_norm(const MatrixXd& m) { return spectral_norm_impl(m); }

StabilityReport stability_constant(const FundamentalMatrixTrack& track, int windows) {
  StabilityReport rep;
  const std::size_t N = track.Phi.size();
  if (N == 0) throw DomainError("stability_constant: empty track");
  std::vector<MatrixXd> inv(N);
  std::vector<bool> usable(N, true);
  for (std::size_t j = 0; j < N; ++j) {
    const MatrixXd& P = track.Phi[j];
    Eigen::JacobiSVD<MatrixXd> svd(P);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= 1e12)) {
      usable[j] = false;
      if (rep.diagnostic.empty()) rep.diagnostic = "Phi(t) singular beyond conditioning threshold 1e12 at t = " + time_str(track.t_grid[j]);
      continue;
    }
    inv[j] = Eigen::PartialPivLU<MatrixXd>(P).inverse();
  }
  // running[k] = max over j <= i <= k of |Phi_i Phi_j^-1|
  std::vector<double> running(N, 1.0);
  double K = 1.0;
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t j = 0; j <= k; ++j) {
      if (!usable[j]) continue;
      K = std::max(K, spectral_norm_impl(track.Phi[k] * inv[j]));
    }
    running[k] = K;
  }
  rep.K_hat = K;
  const double t0 = track.t_grid.front();
  const double t1 = track.t_grid.back();
  rep.window_ends = window_ends(t0, t1, windows);
  for (double e : rep.window_ends) {
    auto it = std::upper_bound(track.t_grid.begin(), track.t_grid.end(), e * (1.0 + 1e-12) + 1e-300);
    const std::size_t idx = static_cast<std::size_t>(it - track.t_grid.begin());
    rep.K_trend.push_back(idx == 0 ? 1.0 : running[idx - 1]);
  }
  if (!rep.diagnostic.empty()) {
    rep.verdict_uniform_stability = StabilityVerdict::Inconclusive;
    return rep;
  }
  const auto& kt = rep.K_trend;
  const std::size_t m = kt.size();
  if (m >= 5) {
    bool growing = true;
    double slope = 0.0;
    for (std::size_t i = m - 4; i < m; ++i) {
      const double inc = std::log(kt[i]) - std::log(kt[i - 1]);
      slope += inc / 4.0;
      if (!(inc > 0.01)) growing = false;
    }
    if (growing) {
      rep.verdict_uniform_stability = StabilityVerdict::EvidenceUnstable;
      rep.growth_exponent = slope;
      return rep;
    }
  }
  if (m >= 3 && kt[m - 1] <= kt[m - 3] * 1.01) {
    rep.verdict_uniform_stability = StabilityVerdict::EvidenceStable;
  }
  return rep;
}

AsymptoticLimit asymptotic_limit(const Trajectory& traj, double window_fraction, double tol) {
  AsymptoticLimit out;
  const double t0 = traj.t0();
  const double t1 = traj.t1();
  const double L = t1 - t0;
  if (!(window_fraction > 0.0 && window_fraction <= 0.5)) throw DomainError("asymptotic_limit: window fraction in (0, 0.5]");
  if (L < 10.0) {
    out.diagnostic = "trajectory shorter than 10 time units";
    return out;
  }
  constexpr int kSamples = 64;
  auto window = [&](double a, double b, VectorXd& mean, double& dev) {
    std::vector<VectorXd> vals;
    for (int i = 0; i <= kSamples; ++i) vals.push_back(traj.at(std::min(b, a + (b - a) * i / kSamples)));
    mean = VectorXd::Zero(vals.front().size());
    for (const auto& v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    dev = 0.0;
    for (const auto& v : vals) dev = std::max(dev, (v - mean).norm());
  };
  const double w = window_fraction * L;
  VectorXd mean_prev;
  window(t1 - 2 * w, t1 - w, mean_prev, out.prev_residual);
  window(t1 - w, t1, out.phi_inf, out.residual);
  out.window_start = t1 - w;
  if (out.residual <= tol && (out.residual <= 0.5 * out.prev_residual || out.prev_residual <= tol)) {
    out.verdict = AsymptoticVerdict::EvidenceYes;
  } else if (out.residual > tol && out.residual >= 0.9 * out.prev_residual) {
    out.verdict = AsymptoticVerdict::EvidenceNo;
  } else {
    out.diagnostic = "tail deviation decreasing but above tolerance";
  }
  return out;
}

GronwallResult gronwall_bound_check(const Trajectory& traj, const std::function<double(double)>& mu,
                                    const std::vector<double>& breakpoints) {
  const auto& rule = gauss_legendre(8);
  GronwallResult res;
  double M = 0.0;
  double min_lw = std::numeric_limits<double>::infinity();
  double s_min = traj.t.front();
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    if (k > 0) {
      std::vector<double> cuts{traj.t[k - 1]};
      for (double b : breakpoints) {
        if (b > traj.t[k - 1] && b < traj.t[k]) cuts.push_back(b);
      }
      cuts.push_back(traj.t[k]);
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c];
        const double b = cuts[c + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) M += half * rule.weights[q] * mu(mid + half * rule.nodes[q]);
      }
    }
    const double norm = traj.y[k].norm();
    if (norm == 0.0) continue;
    const double lw = std::log(norm) - M;
    if (lw < min_lw) {
      min_lw = lw;
      s_min = traj.t[k];
    }
    const double ratio = std::exp(lw - min_lw);
    if (ratio > res.worst_ratio) {
      res.worst_ratio = ratio;
      res.t_at_worst = traj.t[k];
      res.s_at_worst = s_min;
    }
  }
  return res;
}

GronwallResult gronwall_bound_check(const Trajectory& traj, const LinearGenerator& gen) {
  // B = -R, so (B + B^T)/2 = S and mu(B) = mu(S).
  return gronwall_bound_check(traj, [&gen](double t) { return gen.mu(t); }, gen.breakpoints);
}

PerturbationReport perturbation_equivalence(const LinearGenerator& R, const LinearGenerator& Rtil,
                                            const std::vector<double>& t_grid, double tol) {
  if (R.dim != Rtil.dim) throw DomainError("perturbation_equivalence: dimension mismatch");
  PerturbationReport rep;
  const double t0 = t_grid.front();
  const double t1 = t_grid.back();
  std::vector<double> edges{t0};
  const auto ends = window_ends(t0, t1, 8);
  edges.insert(edges.end(), ends.begin(), ends.end());
  std::vector<double> cuts = R.breakpoints;
  cuts.insert(cuts.end(), Rtil.breakpoints.begin(), Rtil.breakpoints.end());
  auto diff = [&](double t) -> Mat {
    Mat m(1, 1);
    m(0, 0) = spectral_norm_impl(Rtil.R(t) - R.R(t));
    return m;
  };
  for (std::size_t w = 0; w + 1 < edges.size(); ++w) {
    std::vector<double> sub{edges[w]};
    for (double b : cuts) {
      if (b > edges[w] && b < edges[w + 1]) sub.push_back(b);
    }
    std::sort(sub.begin(), sub.end());
    sub.push_back(edges[w + 1]);
    const auto ps = PiecewiseSamples::adaptive(diff, sub, 0.1 * tol);
    const double inc = ps.cumulative_at_edges().back()(0, 0);
    rep.l1_window_increments.push_back(inc);
    rep.l1_of_difference += inc;
  }
  const auto& inc = rep.l1_window_increments;
  const std::size_t m = inc.size();
  bool decaying = true;
  if (m >= 4 && inc[m - 1] > 1e-12 * std::max(1.0, rep.l1_of_difference)) {
    decaying = !(inc[m - 1] >= 0.75 * inc[m - 2] && inc[m - 2] >= 0.75 * inc[m - 3]);
  }
  if (!decaying) {
    std::ostringstream os;
    os << "perturbation is not integrable: window integrals of |Rtil - R| do not decay (last " << inc[m - 2] << ", "
       << inc[m - 1] << ")";
    throw DomainError(os.str());
  }
  const auto track_R = fundamental_matrix(R, t_grid, tol);
  const auto track_Rt = fundamental_matrix(Rtil, t_grid, tol);
  rep.K_hat_R = stability_constant(track_R).K_hat;
  rep.K_hat_Rtil = stability_constant(track_Rt).K_hat;
  rep.c_meas = rep.K_hat_R;
  rep.bound_factor = rep.K_hat_Rtil / rep.K_hat_R;
  rep.allowed_factor = std::exp(rep.c_meas * rep.l1_of_difference);
  const double slack = 1.0 + 100.0 * tol;
  const bool forward = rep.K_hat_Rtil <= rep.K_hat_R * rep.allowed_factor * slack;
  const bool backward = rep.K_hat_R <= rep.K_hat_Rtil * std::exp(rep.K_hat_Rtil * rep.l1_of_difference) * slack;
  rep.bound_holds = forward && backward;
  return rep;
}

}  // namespace dynreg
