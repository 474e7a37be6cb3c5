#include "dynreg/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace dynreg {

namespace {

GaussRule compute_gauss_legendre(int m) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_m.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0, p1 = x;
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
    }
    const auto idx = static_cast<std::size_t>(m - 1 - i);
    rule.nodes[idx] = x;
    rule.weights[idx] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

constexpr int kP = PiecewiseSamples::kPoints;
using IntMatrix = std::array<std::array<double, kP>, kP>;

double lagrange(const std::vector<double>& x, int j, double y) {
  double v = 1.0;
  for (int k = 0; k < kP; ++k) {
    if (k != j) v *= (y - x[static_cast<std::size_t>(k)]) / (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(k)]);
  }
  return v;
}

// Q[i][j] = int_{x_i}^{1} l_j(y) dy on the reference interval.
const IntMatrix& suffix_matrix() {
  static const IntMatrix q = [] {
    IntMatrix out{};
    const auto& rule = gauss_legendre(kP);
    for (int i = 0; i < kP; ++i) {
      const double a = rule.nodes[static_cast<std::size_t>(i)];
      const double half = 0.5 * (1.0 - a);
      const double mid = 0.5 * (1.0 + a);
      for (int j = 0; j < kP; ++j) {
        double s = 0.0;
        for (int k = 0; k < kP; ++k) {
          const double y = mid + half * rule.nodes[static_cast<std::size_t>(k)];
          s += rule.weights[static_cast<std::size_t>(k)] * lagrange(rule.nodes, j, y);
        }
        out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = half * s;
      }
    }
    return out;
  }();
  return q;
}

struct PieceEval {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<Mat> values;
  Mat integral;
};

PieceEval eval_piece(const std::function<Mat(double)>& f, double a, double b) {
  const auto& rule = gauss_legendre(kP);
  PieceEval out;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int k = 0; k < kP; ++k) {
    const double t = mid + half * rule.nodes[static_cast<std::size_t>(k)];
    const double w = half * rule.weights[static_cast<std::size_t>(k)];
    Mat v = f(t);
    if (k == 0) out.integral = Mat::Zero(v.rows(), v.cols());
    out.integral += w * v;
    out.nodes.push_back(t);
    out.weights.push_back(w);
    out.values.push_back(std::move(v));
  }
  return out;
}

}  // namespace

const GaussRule& gauss_legendre(int m) {
  if (m < 1) throw DomainError("Gauss-Legendre rule needs m >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, compute_gauss_legendre(m)).first;
  return it->second;
}

SphericalGrid sphere_grid(int n, int resolution) {
  if (n != 2 && n != 3) throw DomainError("sphere_grid supports n = 2 and n = 3 only, got n = " + std::to_string(n));
  const int min_resolution = n == 2 ? 4 : 2;
  if (resolution < min_resolution)
    throw DomainError("sphere_grid resolution must be >= " + std::to_string(min_resolution) + " for n = " +
                      std::to_string(n));
  SphericalGrid grid;
  grid.dim = n;
  grid.resolution = resolution;
  if (n == 2) {
    for (int k = 0; k < resolution; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / resolution;
      Vec v(2);
      v << std::cos(phi), std::sin(phi);
      grid.nodes.push_back(v);
      grid.weights.push_back(1.0 / resolution);
    }
    return grid;
  }
  const auto& rule = gauss_legendre(resolution);
  const int naz = 2 * resolution;
  for (int i = 0; i < resolution; ++i) {
    const double z = rule.nodes[static_cast<std::size_t>(i)];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int k = 0; k < naz; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / naz;
      Vec v(3);
      v << s * std::cos(phi), s * std::sin(phi), z;
      grid.nodes.push_back(v);
      grid.weights.push_back(0.5 * rule.weights[static_cast<std::size_t>(i)] / naz);
    }
  }
  return grid;
}

SphericalGrid default_sphere_grid(int n) { return sphere_grid(n, n == 2 ? 64 : 32); }

PiecewiseSamples PiecewiseSamples::adaptive(const std::function<Mat(double)>& f, std::vector<double> edges, double tol,
                                            double min_width, int max_depth) {
  PiecewiseSamples out;
  out.edges_.push_back(edges.front());

  struct Pending {
    double a, b;
    int depth;
    PieceEval whole;
  };

  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    std::vector<Pending> stack;
    stack.push_back({edges[p], edges[p + 1], 0, eval_piece(f, edges[p], edges[p + 1])});
    // Depth-first, left piece processed first so edges stay sorted.
    while (!stack.empty()) {
      Pending cur = std::move(stack.back());
      stack.pop_back();
      const double mid = 0.5 * (cur.a + cur.b);
      PieceEval left = eval_piece(f, cur.a, mid);
      PieceEval right = eval_piece(f, mid, cur.b);
      const double err = max_abs_entry(cur.whole.integral - left.integral - right.integral);
      const bool accept = err <= tol || cur.depth >= max_depth || (cur.b - cur.a) < min_width || !std::isfinite(err);
      if (accept) {
        for (PieceEval* half : {&left, &right}) {
          out.nodes_.insert(out.nodes_.end(), half->nodes.begin(), half->nodes.end());
          out.weights_.insert(out.weights_.end(), half->weights.begin(), half->weights.end());
          out.values_.insert(out.values_.end(), half->values.begin(), half->values.end());
        }
        out.edges_.push_back(mid);
        out.edges_.push_back(cur.b);
      } else {
        stack.push_back({mid, cur.b, cur.depth + 1, std::move(right)});
        stack.push_back({cur.a, mid, cur.depth + 1, std::move(left)});
      }
    }
  }
  return out;
}

PiecewiseSamples PiecewiseSamples::fixed(const std::function<Mat(double)>& f, std::vector<double> edges) {
  PiecewiseSamples out;
  out.edges_ = std::move(edges);
  for (std::size_t p = 0; p + 1 < out.edges_.size(); ++p) {
    PieceEval e = eval_piece(f, out.edges_[p], out.edges_[p + 1]);
    out.nodes_.insert(out.nodes_.end(), e.nodes.begin(), e.nodes.end());
    out.weights_.insert(out.weights_.end(), e.weights.begin(), e.weights.end());
    out.values_.insert(out.values_.end(), e.values.begin(), e.values.end());
  }
  return out;
}

PiecewiseSamples PiecewiseSamples::resampled(const std::function<Mat(double)>& f) const {
  PiecewiseSamples out = *this;
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.values_[i] = f(nodes_[i]);
  return out;
}

PiecewiseSamples PiecewiseSamples::mapped(const std::function<Mat(double, const Mat&)>& f) const {
  PiecewiseSamples out = *this;
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.values_[i] = f(nodes_[i], values_[i]);
  return out;
}

PiecewiseSamples PiecewiseSamples::with_values(std::vector<Mat> values) const {
  if (values.size() != nodes_.size()) throw DomainError("with_values: one value per node required");
  PiecewiseSamples out = *this;
  out.values_ = std::move(values);
  return out;
}

Mat PiecewiseSamples::piece_integral(std::size_t p) const {
  const std::size_t base = p * kP;
  Mat acc = Mat::Zero(values_[base].rows(), values_[base].cols());
  for (std::size_t k = 0; k < static_cast<std::size_t>(kP); ++k) acc += weights_[base + k] * values_[base + k];
  return acc;
}

std::vector<Mat> PiecewiseSamples::cumulative_at_edges() const {
  std::vector<Mat> out;
  Mat acc = Mat::Zero(values_.front().rows(), values_.front().cols());
  out.push_back(acc);
  for (std::size_t p = 0; p < pieces(); ++p) {
    acc += piece_integral(p);
    out.push_back(acc);
  }
  return out;
}

std::vector<Mat> PiecewiseSamples::suffix_at_nodes() const {
  const auto& q = suffix_matrix();
  std::vector<Mat> out(nodes_.size());
  Mat tail = Mat::Zero(values_.front().rows(), values_.front().cols());
  for (std::size_t p = pieces(); p-- > 0;) {
    const std::size_t base = p * kP;
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (std::size_t i = 0; i < static_cast<std::size_t>(kP); ++i) {
      Mat s = tail;
      for (std::size_t j = 0; j < static_cast<std::size_t>(kP); ++j) s += half * q[i][j] * values_[base + j];
      out[base + i] = std::move(s);
    }
    tail += piece_integral(p);
  }
  return out;
}

std::vector<Mat> PiecewiseSamples::prefix_at_nodes() const {
  std::vector<Mat> suffix = suffix_at_nodes();
  Mat total = cumulative_at_edges().back();
  for (auto& s : suffix) s = total - s;
  return suffix;
}

}  // namespace dynreg
